#!/usr/bin/env node
/**
 * plotkit: render the solver CLI's CSV outputs as SVG figures.
 *
 *   plotkit convergence       --in out/conv/convergence.csv --out fig.svg
 *   plotkit surface           --in state_a.csv state_b.csv  --out fig.svg
 *   plotkit observable-growth --in out/ens/ensemble_stats.csv --out fig.svg
 *
 * The convergence kind recomputes the fitted slope from the CSV and checks
 * it against the slope in the run manifest (a `manifest.txt` next to the
 * CSV, or an explicit --manifest path). Exit status 1 means a check or
 * render failed, 2 means the invocation or an input file was invalid.
 */
import { existsSync, writeFileSync } from "fs";
import { dirname, join } from "path";
import yargs from "yargs";
import { CsvError } from "./csv.js";
import { FigureError, renderConvergence, renderGrowth, renderSurface } from "./figures.js";
import { readManifest, recordedSlope } from "./manifest.js";

interface CommonArgs {
  in: string[];
  out: string;
  title?: string;
}

function renderFor(kind: string, args: CommonArgs, manifestPath?: string): string {
  if (kind === "convergence") {
    if (args.in.length !== 1) {
      throw new FigureError(`convergence takes exactly one CSV, got ${args.in.length}`);
    }
    let recorded: number | undefined;
    const fallback = join(dirname(args.in[0]), "manifest.txt");
    if (manifestPath !== undefined) {
      recorded = recordedSlope(readManifest(manifestPath));
      if (recorded === undefined) {
        throw new FigureError(`${manifestPath} records no fitted_slope`);
      }
    } else if (existsSync(fallback)) {
      recorded = recordedSlope(readManifest(fallback));
    }
    return renderConvergence(args.in[0], { title: args.title, recordedSlope: recorded });
  }
  if (kind === "surface") {
    return renderSurface(args.in, { title: args.title });
  }
  return renderGrowth(args.in, { title: args.title });
}

export function main(argv: string[]): number {
  const parser = yargs(argv)
    .scriptName("plotkit")
    .usage("$0 <kind> --in <csv...> --out <image>")
    .option("in", { type: "string", array: true, demandOption: true, describe: "input CSV file(s)" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("title", { type: "string", describe: "figure title override" })
    .command("convergence", "log-log error decay with fitted slope", (cmd) =>
      cmd.option("manifest", {
        type: "string",
        describe: "run manifest holding the recorded slope (default: next to the CSV)",
      })
    )
    .command("surface", "amplitude surface |u| from state dumps")
    .command("observable-growth", "mean charge/energy with 3 SE bands")
    .demandCommand(1, "pick one of: convergence, surface, observable-growth")
    .strict()
    .exitProcess(false)
    .fail((message, error) => {
      throw error ?? new UsageError(message ?? "invalid invocation");
    });

  let parsed;
  try {
    parsed = parser.parseSync();
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    return 2;
  }
  // With exitProcess(false), --help/--version print and fall through here.
  if (parsed.help === true || parsed.version === true) {
    return 0;
  }
  const kind = String(parsed._[0]);
  try {
    const svg = renderFor(
      kind,
      { in: parsed.in as string[], out: parsed.out as string, title: parsed.title as string | undefined },
      (parsed as { manifest?: string }).manifest
    );
    writeFileSync(parsed.out as string, svg, "utf8");
    console.log(`wrote ${parsed.out}`);
    return 0;
  } catch (error) {
    if (error instanceof CsvError || error instanceof UsageError) {
      console.error(error.message);
      return 2;
    }
    console.error(error instanceof Error ? error.message : String(error));
    return 1;
  }
}

class UsageError extends Error {}

const invokedAsScript =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedAsScript) {
  process.exit(main(process.argv.slice(2)));
}
