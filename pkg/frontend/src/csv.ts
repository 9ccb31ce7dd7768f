/**
 * Readers for the solver CLI's CSV outputs.
 *
 * Every reader checks the header against the documented schema and reports
 * problems with the file path and the offending column, so a figure request
 * pointed at the wrong run directory fails loudly instead of plotting junk.
 */
import { readFileSync } from "fs";
import Papa from "papaparse";

export class CsvError extends Error {}

export interface ConvergenceRow {
  tau: number;
  rmsError: number;
  se: number;
}

export interface EnsembleRow {
  t: number;
  meanCharge: number;
  seCharge: number;
  meanEnergy: number;
  seEnergy: number;
}

export interface TrajectoryRow {
  n: number;
  t: number;
  charge: number;
  energy: number;
}

export interface StateRow {
  j: number;
  x: number;
  re: number;
  im: number;
}

export const CONVERGENCE_COLUMNS = ["tau", "rms_error", "se", "log2_tau", "log2_err"];
export const ENSEMBLE_COLUMNS = ["t", "mean_charge", "se_charge", "mean_energy", "se_energy"];
export const TRAJECTORY_COLUMNS = ["n", "t", "charge", "energy", "charge_resid", "energy_resid"];
export const STATE_COLUMNS = ["j", "x", "re", "im"];

function parseTable(path: string, columns: string[]): Record<string, string>[] {
  let content: string;
  try {
    content = readFileSync(path, "utf8");
  } catch {
    throw new CsvError(`missing file: ${path}`);
  }
  const parsed = Papa.parse<Record<string, string>>(content, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  if (fields.join(",") !== columns.join(",")) {
    throw new CsvError(
      `${path}: expected columns ${columns.join(",")}, got ${fields.join(",") || "(none)"}`
    );
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  return parsed.data;
}

function numberIn(path: string, row: Record<string, string>, column: string,
                  allowNan = false): number {
  const raw = row[column];
  const value = Number(raw);
  if (Number.isFinite(value)) return value;
  if (allowNan && raw !== undefined && raw.trim().toLowerCase() === "nan") return NaN;
  throw new CsvError(`${path}: column ${column} holds non-numeric value ${JSON.stringify(raw)}`);
}

export function readConvergenceCsv(path: string): ConvergenceRow[] {
  return parseTable(path, CONVERGENCE_COLUMNS).map((row) => ({
    tau: numberIn(path, row, "tau"),
    rmsError: numberIn(path, row, "rms_error"),
    se: numberIn(path, row, "se"),
  }));
}

export function readEnsembleCsv(path: string): EnsembleRow[] {
  return parseTable(path, ENSEMBLE_COLUMNS).map((row) => ({
    t: numberIn(path, row, "t"),
    meanCharge: numberIn(path, row, "mean_charge"),
    seCharge: numberIn(path, row, "se_charge"),
    meanEnergy: numberIn(path, row, "mean_energy"),
    seEnergy: numberIn(path, row, "se_energy"),
  }));
}

export function readTrajectoryCsv(path: string): TrajectoryRow[] {
  // Residual columns may legitimately hold nan (no identity at that step);
  // they are not plotted, only validated.
  return parseTable(path, TRAJECTORY_COLUMNS).map((row) => {
    numberIn(path, row, "charge_resid", true);
    numberIn(path, row, "energy_resid", true);
    return {
      n: numberIn(path, row, "n"),
      t: numberIn(path, row, "t"),
      charge: numberIn(path, row, "charge"),
      energy: numberIn(path, row, "energy"),
    };
  });
}

export function readStateCsv(path: string): StateRow[] {
  return parseTable(path, STATE_COLUMNS).map((row) => ({
    j: numberIn(path, row, "j"),
    x: numberIn(path, row, "x"),
    re: numberIn(path, row, "re"),
    im: numberIn(path, row, "im"),
  }));
}

/** First header line of a CSV file, for dispatching on the table kind. */
export function peekHeader(path: string): string {
  let content: string;
  try {
    content = readFileSync(path, "utf8");
  } catch {
    throw new CsvError(`missing file: ${path}`);
  }
  return content.split(/\r?\n/, 1)[0] ?? "";
}
