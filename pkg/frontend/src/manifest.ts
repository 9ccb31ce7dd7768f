/** Reader for the solver's run manifest: plain text `key: value` lines. */
import { readFileSync } from "fs";

export function readManifest(path: string): Map<string, string> {
  let content: string;
  try {
    content = readFileSync(path, "utf8");
  } catch {
    throw new Error(`missing file: ${path}`);
  }
  const entries = new Map<string, string>();
  for (const line of content.split(/\r?\n/)) {
    if (!line.trim()) continue;
    const split = line.indexOf(":");
    if (split < 0) continue;
    entries.set(line.slice(0, split).trim(), line.slice(split + 1).trim());
  }
  return entries;
}

/** Slope recorded by the solver CLI after a convergence run, if present. */
export function recordedSlope(manifest: Map<string, string>): number | undefined {
  const raw = manifest.get("fitted_slope");
  if (raw === undefined) return undefined;
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`manifest fitted_slope is not numeric: ${JSON.stringify(raw)}`);
  }
  return value;
}
