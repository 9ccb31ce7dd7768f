import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";
import { CsvError, readEnsembleCsv } from "../src/csv.js";
import {
  FigureError,
  aggregateTrajectories,
  renderConvergence,
  renderGrowth,
  renderSurface,
} from "../src/figures.js";
import { readManifest, recordedSlope } from "../src/manifest.js";

const FIXTURES = fileURLToPath(new URL("fixtures", import.meta.url));
const CONV = join(FIXTURES, "conv", "convergence.csv");
const STATS = join(FIXTURES, "ens", "ensemble_stats.csv");
const STATES = ["a", "b", "c"].map((s) => join(FIXTURES, "states", `state_${s}.csv`));

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "plotkit-"));
}

function exactOrderTwoCsv(): string {
  const header = "tau,rms_error,se,log2_tau,log2_err";
  const rows = [5, 6, 7, 8, 9].map((k) => {
    const tau = 2 ** -k;
    const err = 0.3 * tau * tau;
    return `${tau},${err},0,${-k},${Math.log2(err)}`;
  });
  const path = join(tempDir(), "convergence.csv");
  writeFileSync(path, `${header}\n${rows.join("\n")}\n`, "utf8");
  return path;
}

describe("convergence figure", () => {
  it("annotates an exact order-two line as 2.000", () => {
    const svg = renderConvergence(exactOrderTwoCsv());
    expect(svg).toContain("slope = 2.000");
    expect(svg).toContain("<svg");
  });

  it("matches the slope recorded by the solver on a real run", () => {
    const recorded = recordedSlope(readManifest(join(FIXTURES, "conv", "manifest.txt")));
    expect(recorded).toBeDefined();
    const svg = renderConvergence(CONV, { recordedSlope: recorded });
    expect(svg).toContain(`matches recorded slope ${recorded!.toFixed(3)}`);
  });

  it("refuses to annotate a slope that contradicts the manifest", () => {
    expect(() => renderConvergence(CONV, { recordedSlope: 1.9 })).toThrow(FigureError);
    expect(() => renderConvergence(CONV, { recordedSlope: 1.9 })).toThrow(
      /disagrees with recorded slope 1\.9/
    );
  });

  it("never modifies its input", () => {
    const before = readFileSync(CONV, "utf8");
    renderConvergence(CONV);
    expect(readFileSync(CONV, "utf8")).toBe(before);
  });

  it("rejects non-positive errors and single-row tables", () => {
    const dir = tempDir();
    const header = "tau,rms_error,se,log2_tau,log2_err";
    const flat = join(dir, "flat.csv");
    writeFileSync(flat, `${header}\n0.25,0,0,-2,0\n0.125,0.1,0,-3,-3.3\n`, "utf8");
    expect(() => renderConvergence(flat)).toThrow(/must be positive/);
    const single = join(dir, "single.csv");
    writeFileSync(single, `${header}\n0.25,0.1,0,-2,-3.3\n`, "utf8");
    expect(() => renderConvergence(single)).toThrow(/at least 2 step sizes/);
  });
});

describe("surface figure", () => {
  it("renders one cell per node and snapshot", () => {
    const svg = renderSurface(STATES);
    // 31 interior nodes x 3 snapshots, plus the document background.
    expect(svg.match(/<rect /g)).toHaveLength(31 * 3 + 1);
    expect(svg).toContain("snapshot");
  });

  it("rejects snapshots from a different grid, naming the file", () => {
    const path = join(tempDir(), "tiny.csv");
    writeFileSync(path, "j,x,re,im\n1,0.5,1.0,0.0\n", "utf8");
    expect(() => renderSurface([STATES[0], path])).toThrow(
      new RegExp(`tiny\\.csv: 1 nodes, expected 31`)
    );
  });

  it("needs at least one input", () => {
    expect(() => renderSurface([])).toThrow(/at least one state CSV/);
  });
});

describe("growth figure", () => {
  it("aggregates trajectory files to the solver's own ensemble statistics", () => {
    const trajectories = [0, 1, 2, 3, 4, 5].map((i) =>
      join(FIXTURES, "ens", `trajectory_${i}.csv`)
    );
    const aggregated = aggregateTrajectories(trajectories);
    const published = readEnsembleCsv(STATS);
    expect(aggregated).toHaveLength(published.length);
    for (let i = 0; i < published.length; i++) {
      expect(aggregated[i].t).toBeCloseTo(published[i].t, 14);
      expect(aggregated[i].meanCharge).toBeCloseTo(published[i].meanCharge, 13);
      expect(aggregated[i].seCharge).toBeCloseTo(published[i].seCharge, 13);
      expect(aggregated[i].meanEnergy).toBeCloseTo(published[i].meanEnergy, 12);
      expect(aggregated[i].seEnergy).toBeCloseTo(published[i].seEnergy, 12);
    }
  });

  it("draws a band and a mean line per observable", () => {
    const svg = renderGrowth([STATS]);
    expect(svg.match(/<polygon /g)).toHaveLength(2);
    expect(svg.match(/<polyline /g)).toHaveLength(2);
    expect(svg).toContain("charge");
    expect(svg).toContain("energy");
  });

  it("accepts trajectory files directly", () => {
    const svg = renderGrowth([
      join(FIXTURES, "ens", "trajectory_0.csv"),
      join(FIXTURES, "ens", "trajectory_1.csv"),
    ]);
    expect(svg.match(/<polygon /g)).toHaveLength(2);
  });

  it("rejects unknown headers with both accepted schemas in the message", () => {
    const path = join(tempDir(), "what.csv");
    writeFileSync(path, "a,b\n1,2\n", "utf8");
    expect(() => renderGrowth([path])).toThrow(CsvError);
    expect(() => renderGrowth([path])).toThrow(/expected columns t,mean_charge/);
  });

  it("rejects extra files next to an ensemble statistics CSV", () => {
    expect(() => renderGrowth([STATS, STATS])).toThrow(/single ensemble statistics CSV/);
  });
});
