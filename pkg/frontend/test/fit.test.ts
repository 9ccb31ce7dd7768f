import { describe, expect, it } from "vitest";
import { fitLine, log2Fit } from "../src/fit.js";

describe("fitLine", () => {
  it("recovers an exact line with zero residual", () => {
    const xs = [-11, -10, -9, -8, -7];
    const fit = fitLine(xs, xs.map((x) => 2 * x + 1));
    expect(fit.slope).toBeCloseTo(2, 12);
    expect(fit.intercept).toBeCloseTo(1, 12);
    expect(fit.residual).toBeLessThan(1e-12);
  });

  it("keeps the slope under a centered alternating perturbation", () => {
    // The perturbation is orthogonal to x - mean(x), so the slope is exact
    // and the residual is the rms of the perturbation itself.
    const xs = [0, 1, 2, 3, 4];
    const bumps = [0.1, -0.1, 0.1, -0.1, 0.1];
    const fit = fitLine(xs, xs.map((x, i) => x + bumps[i]));
    expect(fit.slope).toBeCloseTo(1, 12);
    expect(fit.residual).toBeCloseTo(
      Math.sqrt(bumps.reduce((a, b) => a + (b - 0.02) ** 2, 0) / 5),
      12
    );
  });

  it("rejects degenerate inputs", () => {
    expect(() => fitLine([1, 1, 1], [0, 1, 2])).toThrow(/all x values equal/);
    expect(() => fitLine([1, 2], [0])).toThrow(/mismatched lengths/);
    expect(() => fitLine([1], [0])).toThrow(/at least 2 points/);
  });
});

describe("log2Fit", () => {
  it("reads order two off errors proportional to tau squared", () => {
    const taus = [1 / 4, 1 / 8, 1 / 16, 1 / 32];
    const fit = log2Fit(taus, taus.map((t) => 0.7 * t * t));
    expect(fit.slope).toBeCloseTo(2, 12);
    expect(fit.residual).toBeLessThan(1e-12);
  });
});
