/** Ordinary least squares on (log2 tau, log2 error), kept independent of the
 * solver's own fit so the figure double-checks the recorded slope. */
export interface LineFit {
  slope: number;
  intercept: number;
  /** Root-mean-square of the fit residuals. */
  residual: number;
}

export function fitLine(xs: number[], ys: number[]): LineFit {
  if (xs.length !== ys.length) {
    throw new Error(`mismatched lengths: ${xs.length} vs ${ys.length}`);
  }
  if (xs.length < 2) {
    throw new Error(`need at least 2 points, got ${xs.length}`);
  }
  const n = xs.length;
  const meanX = xs.reduce((a, b) => a + b, 0) / n;
  const meanY = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - meanX) ** 2;
    sxy += (xs[i] - meanX) * (ys[i] - meanY);
  }
  if (sxx === 0) {
    throw new Error("degenerate fit: all x values equal");
  }
  const slope = sxy / sxx;
  const intercept = meanY - slope * meanX;
  let sse = 0;
  for (let i = 0; i < n; i++) {
    sse += (ys[i] - slope * xs[i] - intercept) ** 2;
  }
  return { slope, intercept, residual: Math.sqrt(sse / n) };
}

export function log2Fit(taus: number[], errors: number[]): LineFit {
  return fitLine(taus.map(Math.log2), errors.map(Math.log2));
}
