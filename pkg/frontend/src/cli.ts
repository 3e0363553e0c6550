#!/usr/bin/env node
/**
 * report: figures and a cross-checked markdown summary for a run directory.
 *
 *   report --in runs/sbs-s2 --figures boxplot-utility,space-timeseries --format png
 *
 * Omitting --figures renders all figures; --figures "" writes only
 * summary.md. Outputs land next to the inputs. Exit codes: 2 for usage
 * errors, 1 for schema or data problems.
 */

import { existsSync, realpathSync, statSync } from "node:fs";
import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";

import { FIGURE_NAMES, render, type FigureName, type ReportSpec } from "./render.js";

const USAGE = `usage: report --in <run-dir> [--figures <name,...>] [--format png|svg]

figures: ${FIGURE_NAMES.join(", ")} (default: all)
format:  svg (default) or png`;

class UsageError extends Error {}

function parseFigures(value: string | undefined): FigureName[] {
  if (value === undefined) return [...FIGURE_NAMES];
  const names = value
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
  for (const name of names) {
    if (!(FIGURE_NAMES as readonly string[]).includes(name)) {
      throw new UsageError(`unknown figure ${JSON.stringify(name)}`);
    }
  }
  return names as FigureName[];
}

function parseSpec(argv: string[]): ReportSpec | null {
  const { values, positionals } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      figures: { type: "string" },
      format: { type: "string", default: "svg" },
      help: { type: "boolean", short: "h", default: false },
    },
    allowPositionals: true,
  });
  if (values.help) return null;
  if (positionals.length > 0) {
    throw new UsageError(`unexpected argument ${JSON.stringify(positionals[0])}`);
  }
  if (values.in === undefined) throw new UsageError("--in is required");
  const format = values.format === "png" ? "png" : values.format === "svg" ? "svg" : null;
  if (format === null) {
    throw new UsageError(`--format must be png or svg, got ${JSON.stringify(values.format)}`);
  }
  if (!existsSync(values.in) || !statSync(values.in).isDirectory()) {
    throw new UsageError(`--in ${JSON.stringify(values.in)} is not a directory`);
  }
  return { inputDir: values.in, figures: parseFigures(values.figures), format };
}

export async function main(argv: string[]): Promise<number> {
  let spec;
  try {
    spec = parseSpec(argv);
  } catch (err) {
    const code = (err as { code?: string }).code ?? "";
    if (err instanceof UsageError || code.startsWith("ERR_PARSE_ARGS")) {
      console.error(`report: ${(err as Error).message}\n${USAGE}`);
      return 2;
    }
    throw err;
  }
  if (spec === null) {
    console.log(USAGE);
    return 0;
  }
  try {
    for (const path of await render(spec)) {
      console.log(`wrote ${path}`);
    }
  } catch (err) {
    console.error(`report: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
if (invokedDirectly) {
  process.exitCode = await main(process.argv.slice(2));
}
