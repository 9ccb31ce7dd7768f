/**
 * Minimal SVG chart primitives: linear scales, 1-2-5 ticks, and string
 * emitters for the handful of marks the figures need. No DOM, no canvas;
 * the output is a standalone vector file.
 */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const scale = ((value: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Round tick positions covering [lo, hi], steps from the 1-2-5 ladder. */
export function ticks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(count - 1, 1);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const mult of [1, 2, 5, 10]) {
    if (mult * power >= rawStep) {
      step = mult * power;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (value: number) => {
  const rounded = Number(value.toFixed(2));
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

export function line(x1: number, y1: number, x2: number, y2: number, stroke: string,
                     width = 1): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function polyline(points: Array<[number, number]>, stroke: string, width = 1.5,
                         dash?: string): string {
  const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${coords}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`;
}

export function polygon(points: Array<[number, number]>, fill: string, opacity = 1): string {
  const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polygon points="${coords}" fill="${fill}" fill-opacity="${opacity}" stroke="none"/>`;
}

export function circle(cx: number, cy: number, r: number, fill: string): string {
  return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"/>`;
}

export function rect(x: number, y: number, w: number, h: number, fill: string): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`;
}

export function text(x: number, y: number, content: string, options: {
  size?: number;
  anchor?: "start" | "middle" | "end";
  rotate?: number;
  fill?: string;
} = {}): string {
  const size = options.size ?? 11;
  const anchor = options.anchor ?? "start";
  const fill = options.fill ?? "#333";
  const transform = options.rotate
    ? ` transform="rotate(${options.rotate} ${fmt(x)} ${fmt(y)})"`
    : "";
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" font-size="${size}" text-anchor="${anchor}" fill="${fill}"${transform}>${esc(content)}</text>`;
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export interface Frame {
  x: Scale;
  y: Scale;
  marks: string[];
}

/**
 * Plot frame with axis lines, ticks, and labels. `tickFormat` lets the
 * log2 charts print powers of two instead of raw exponents.
 */
export function frame(options: {
  width: number;
  height: number;
  xDomain: [number, number];
  yDomain: [number, number];
  xLabel: string;
  yLabel: string;
  title: string;
  xTicks?: number[];
  yTicks?: number[];
  xTickFormat?: (v: number) => string;
  yTickFormat?: (v: number) => string;
}): Frame {
  const margin = { left: 64, right: 16, top: 34, bottom: 46 };
  const x = linearScale(options.xDomain, [margin.left, options.width - margin.right]);
  const y = linearScale(options.yDomain, [options.height - margin.bottom, margin.top]);
  const xTicks = options.xTicks ?? ticks(options.xDomain[0], options.xDomain[1]);
  const yTicks = options.yTicks ?? ticks(options.yDomain[0], options.yDomain[1]);
  const formatX = options.xTickFormat ?? ((v) => String(Number(v.toPrecision(6))));
  const formatY = options.yTickFormat ?? ((v) => String(Number(v.toPrecision(6))));
  const bottom = options.height - margin.bottom;
  const marks: string[] = [];
  marks.push(text(options.width / 2, 18, options.title, { size: 13, anchor: "middle" }));
  marks.push(line(margin.left, bottom, options.width - margin.right, bottom, "#333"));
  marks.push(line(margin.left, margin.top, margin.left, bottom, "#333"));
  for (const v of xTicks) {
    const px = x(v);
    marks.push(line(px, bottom, px, bottom + 4, "#333"));
    marks.push(text(px, bottom + 16, formatX(v), { anchor: "middle", size: 10 }));
  }
  for (const v of yTicks) {
    const py = y(v);
    marks.push(line(margin.left - 4, py, margin.left, py, "#333"));
    marks.push(text(margin.left - 7, py + 3, formatY(v), { anchor: "end", size: 10 }));
  }
  marks.push(
    text(options.width / 2, options.height - 8, options.xLabel, { anchor: "middle" })
  );
  marks.push(
    text(14, (margin.top + bottom) / 2, options.yLabel, { anchor: "middle", rotate: -90 })
  );
  return { x, y, marks };
}
