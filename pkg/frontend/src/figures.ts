/**
 * The three figure kinds, each turning one or more solver CSV files into a
 * standalone SVG string. File writing and flag parsing live in cli.ts.
 */
import {
  EnsembleRow,
  readConvergenceCsv,
  readEnsembleCsv,
  readStateCsv,
  readTrajectoryCsv,
  peekHeader,
  CsvError,
  ENSEMBLE_COLUMNS,
  TRAJECTORY_COLUMNS,
} from "./csv.js";
import { log2Fit } from "./fit.js";
import { circle, frame, polygon, polyline, rect, svgDocument, text } from "./svg.js";

export class FigureError extends Error {}

const WIDTH = 560;
const HEIGHT = 420;
const CHARGE_COLOR = "#1f6fb4";
const ENERGY_COLOR = "#c9442a";

/** How far the recomputed slope may sit from the one in the run manifest. */
export const SLOPE_MATCH_TOL = 1e-9;

function powerOfTwoLabel(exponent: number): string {
  return `2^${Math.round(exponent)}`;
}

function integerTicks(lo: number, hi: number, maxCount = 8): number[] {
  const step = Math.max(1, Math.ceil((hi - lo) / maxCount));
  const out: number[] = [];
  for (let v = Math.ceil(lo); v <= hi; v += step) out.push(v);
  return out;
}

/**
 * Log-log error decay with the OLS slope recomputed from the raw columns.
 * When the slope the solver recorded is supplied, the two must agree to
 * SLOPE_MATCH_TOL; a disagreement means the figure would lie about the run.
 */
export function renderConvergence(csvPath: string, options: {
  title?: string;
  recordedSlope?: number;
} = {}): string {
  const rows = readConvergenceCsv(csvPath);
  if (rows.length < 2) {
    throw new FigureError(`${csvPath}: need at least 2 step sizes, got ${rows.length}`);
  }
  for (const row of rows) {
    if (row.tau <= 0 || row.rmsError <= 0) {
      throw new FigureError(`${csvPath}: tau and rms_error must be positive to take logs`);
    }
  }
  const fit = log2Fit(rows.map((r) => r.tau), rows.map((r) => r.rmsError));
  if (options.recordedSlope !== undefined) {
    const gap = Math.abs(fit.slope - options.recordedSlope);
    if (gap > SLOPE_MATCH_TOL) {
      throw new FigureError(
        `recomputed slope ${fit.slope} disagrees with recorded slope ` +
          `${options.recordedSlope} by ${gap.toExponential(2)} (tolerance ${SLOPE_MATCH_TOL})`
      );
    }
  }

  const xs = rows.map((r) => Math.log2(r.tau));
  const ys = rows.map((r) => Math.log2(r.rmsError));
  const xPad = 0.4;
  const ySpan = Math.max(...ys) - Math.min(...ys);
  const yPad = Math.max(0.5, 0.08 * ySpan);
  const f = frame({
    width: WIDTH,
    height: HEIGHT,
    xDomain: [Math.min(...xs) - xPad, Math.max(...xs) + xPad],
    yDomain: [Math.min(...ys) - yPad, Math.max(...ys) + yPad],
    xLabel: "step size",
    yLabel: "rms error at final time",
    title: options.title ?? "strong error vs step size",
    xTicks: integerTicks(Math.min(...xs) - xPad, Math.max(...xs) + xPad),
    xTickFormat: powerOfTwoLabel,
    yTickFormat: powerOfTwoLabel,
  });
  const body = [...f.marks];
  const fitted = xs.map(
    (x) => [f.x(x), f.y(fit.slope * x + fit.intercept)] as [number, number]
  );
  body.push(polyline(fitted, "#888", 1.2, "5,4"));
  body.push(polyline(xs.map((x, i) => [f.x(x), f.y(ys[i])]), CHARGE_COLOR));
  xs.forEach((x, i) => body.push(circle(f.x(x), f.y(ys[i]), 3.2, CHARGE_COLOR)));
  body.push(text(f.x.range[0] + 10, 48, `slope = ${fit.slope.toFixed(3)}`, { size: 12 }));
  if (options.recordedSlope !== undefined) {
    body.push(
      text(f.x.range[0] + 10, 64, `matches recorded slope ${options.recordedSlope.toFixed(3)}`,
           { size: 10, fill: "#666" })
    );
  }
  return svgDocument(WIDTH, HEIGHT, body);
}

function viridis(v: number): string {
  // Five-anchor approximation, linearly interpolated in RGB.
  const anchors: Array<[number, number, number]> = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
  ];
  const clamped = Math.min(Math.max(v, 0), 1);
  const pos = clamped * (anchors.length - 1);
  const low = Math.min(Math.floor(pos), anchors.length - 2);
  const w = pos - low;
  const mix = anchors[low].map((c, i) => Math.round(c + w * (anchors[low + 1][i] - c)));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

/**
 * Amplitude surface |u| over space and snapshot index. Each input CSV is
 * one state dump on the same grid; the vertical axis orders them as given.
 */
export function renderSurface(csvPaths: string[], options: { title?: string } = {}): string {
  if (csvPaths.length === 0) {
    throw new FigureError("surface needs at least one state CSV");
  }
  const slices = csvPaths.map((path) => {
    const rows = readStateCsv(path);
    return { path, x: rows.map((r) => r.x), amp: rows.map((r) => Math.hypot(r.re, r.im)) };
  });
  const nodes = slices[0].x;
  for (const slice of slices) {
    if (slice.x.length !== nodes.length) {
      throw new FigureError(
        `${slice.path}: ${slice.x.length} nodes, expected ${nodes.length} as in ${slices[0].path}`
      );
    }
  }
  const peak = Math.max(...slices.map((s) => Math.max(...s.amp)), Number.MIN_VALUE);

  const f = frame({
    width: WIDTH,
    height: HEIGHT,
    xDomain: [0, 1],
    yDomain: [0, slices.length],
    xLabel: "x",
    yLabel: "snapshot",
    title: options.title ?? "amplitude surface |u|",
    yTicks: integerTicks(0, slices.length),
  });
  const body = [...f.marks];
  // Cell edges halfway between nodes; the first/last cells reach the walls.
  const edges = [0, ...nodes.slice(1).map((x, i) => (x + nodes[i]) / 2), 1];
  slices.forEach((slice, row) => {
    const yTop = f.y(row + 1);
    const cellHeight = f.y(row) - yTop;
    slice.amp.forEach((amp, i) => {
      const left = f.x(edges[i]);
      body.push(rect(left, yTop, f.x(edges[i + 1]) - left, cellHeight, viridis(amp / peak)));
    });
  });
  body.push(text(WIDTH - 16, 48, `max |u| = ${peak.toPrecision(4)}`, { anchor: "end", size: 10 }));
  return svgDocument(WIDTH, HEIGHT, body);
}

/** Mean and standard error across per-trajectory observable files. */
export function aggregateTrajectories(paths: string[]): EnsembleRow[] {
  const series = paths.map((path) => ({ path, rows: readTrajectoryCsv(path) }));
  const base = series[0];
  for (const s of series) {
    if (s.rows.length !== base.rows.length) {
      throw new FigureError(
        `${s.path}: ${s.rows.length} rows, expected ${base.rows.length} as in ${base.path}`
      );
    }
  }
  const n = series.length;
  return base.rows.map((row, i) => {
    const charges = series.map((s) => s.rows[i].charge);
    const energies = series.map((s) => s.rows[i].energy);
    const mean = (vs: number[]) => vs.reduce((a, b) => a + b, 0) / n;
    const se = (vs: number[], m: number) =>
      n > 1 ? Math.sqrt(vs.reduce((a, v) => a + (v - m) ** 2, 0) / (n - 1)) / Math.sqrt(n) : 0;
    const meanCharge = mean(charges);
    const meanEnergy = mean(energies);
    return {
      t: row.t,
      meanCharge,
      seCharge: se(charges, meanCharge),
      meanEnergy,
      seEnergy: se(energies, meanEnergy),
    };
  });
}

/**
 * Mean charge and energy over time with 3-standard-error bands. Accepts
 * either the aggregated ensemble statistics file or a set of per-trajectory
 * observable files, telling them apart by the header row.
 */
export function renderGrowth(csvPaths: string[], options: { title?: string } = {}): string {
  if (csvPaths.length === 0) {
    throw new FigureError("observable-growth needs at least one CSV");
  }
  const header = peekHeader(csvPaths[0]);
  let rows: EnsembleRow[];
  if (header === ENSEMBLE_COLUMNS.join(",")) {
    if (csvPaths.length !== 1) {
      throw new FigureError("pass a single ensemble statistics CSV or only trajectory CSVs");
    }
    rows = readEnsembleCsv(csvPaths[0]);
  } else if (header === TRAJECTORY_COLUMNS.join(",")) {
    rows = aggregateTrajectories(csvPaths);
  } else {
    throw new CsvError(
      `${csvPaths[0]}: expected columns ${ENSEMBLE_COLUMNS.join(",")} or ` +
        `${TRAJECTORY_COLUMNS.join(",")}, got ${header || "(none)"}`
    );
  }

  const bands = rows.flatMap((r) => [
    r.meanCharge - 3 * r.seCharge,
    r.meanCharge + 3 * r.seCharge,
    r.meanEnergy - 3 * r.seEnergy,
    r.meanEnergy + 3 * r.seEnergy,
  ]);
  const lo = Math.min(...bands);
  const hi = Math.max(...bands);
  const pad = Math.max(0.05 * (hi - lo), 1e-12);
  const times = rows.map((r) => r.t);
  const f = frame({
    width: WIDTH,
    height: HEIGHT,
    xDomain: [Math.min(...times), Math.max(...times)],
    yDomain: [lo - pad, hi + pad],
    xLabel: "t",
    yLabel: "ensemble mean",
    title: options.title ?? "observable growth (mean and 3 SE band)",
  });
  const body = [...f.marks];
  const band = (mean: (r: EnsembleRow) => number, se: (r: EnsembleRow) => number,
                color: string) => {
    const upper = rows.map((r) => [f.x(r.t), f.y(mean(r) + 3 * se(r))] as [number, number]);
    const lower = rows.map((r) => [f.x(r.t), f.y(mean(r) - 3 * se(r))] as [number, number]);
    body.push(polygon([...upper, ...lower.reverse()], color, 0.18));
    body.push(polyline(rows.map((r) => [f.x(r.t), f.y(mean(r))]), color));
  };
  band((r) => r.meanCharge, (r) => r.seCharge, CHARGE_COLOR);
  band((r) => r.meanEnergy, (r) => r.seEnergy, ENERGY_COLOR);
  body.push(text(f.x.range[0] + 10, 48, "charge", { size: 11, fill: CHARGE_COLOR }));
  body.push(text(f.x.range[0] + 10, 64, "energy", { size: 11, fill: ENERGY_COLOR }));
  return svgDocument(WIDTH, HEIGHT, body);
}
