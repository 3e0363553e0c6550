/**
 * Report orchestration: load a run directory, cross-check the aggregates,
 * write summary.md and the requested figures next to the inputs.
 *
 * Rendering never modifies the input files and embeds no timestamps, so
 * rerunning on the same directory reproduces every output byte for byte.
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { basename, join, resolve } from "node:path";

import { loadRunDirectory, SchemaError, type CyclesRun } from "./cycles.js";
import { FIGURE_NAMES, renderFigure, type FigureName } from "./figures.js";
import { buildSummaryMd, crossCheckSummary, type StatsJson } from "./summary.js";

export { FIGURE_NAMES, type FigureName };

export interface ReportSpec {
  inputDir: string;
  figures: FigureName[];
  format: "png" | "svg";
}

function scenarioName(dir: string): string {
  const configPath = join(dir, "config.json");
  if (existsSync(configPath)) {
    const config: unknown = JSON.parse(readFileSync(configPath, "utf-8"));
    if (typeof config === "object" && config !== null && "name" in config) {
      const name = (config as { name: unknown }).name;
      if (typeof name === "string" && name !== "") return name;
    }
  }
  return basename(resolve(dir));
}

function loadStats(dir: string): StatsJson | null {
  const statsPath = join(dir, "stats.json");
  if (!existsSync(statsPath)) return null;
  const stats = JSON.parse(readFileSync(statsPath, "utf-8")) as StatsJson;
  if (stats.schema_version !== 1) {
    throw new SchemaError(
      `stats.json: unsupported schema_version ${JSON.stringify(stats.schema_version)}`,
    );
  }
  return stats;
}

async function toPng(svg: string): Promise<Buffer> {
  const { Resvg } = await import("@resvg/resvg-js");
  const rendered = new Resvg(svg, {
    font: { loadSystemFonts: true, defaultFontFamily: "DejaVu Sans" },
  }).render();
  return rendered.asPng();
}

/** Renders the report into spec.inputDir and returns the written paths. */
export async function render(spec: ReportSpec): Promise<string[]> {
  const dir = spec.inputDir;
  const runs: CyclesRun[] = loadRunDirectory(dir);
  const summaryPath = join(dir, "summary.csv");
  if (!existsSync(summaryPath)) {
    throw new SchemaError(`${summaryPath}: missing (run the summarize step first)`);
  }
  const rows = crossCheckSummary(runs, readFileSync(summaryPath, "utf-8"));
  const stats = loadStats(dir);
  const scenario = scenarioName(dir);

  const written: string[] = [];
  const summaryMd = join(dir, "summary.md");
  writeFileSync(summaryMd, buildSummaryMd(scenario, rows, runs[0]!.qualityNames, stats) + "\n");
  written.push(summaryMd);

  for (const figure of spec.figures) {
    const svg = renderFigure(figure, runs, scenario);
    const path = join(dir, `${figure}.${spec.format}`);
    if (spec.format === "png") {
      writeFileSync(path, await toPng(svg));
    } else {
      writeFileSync(path, svg);
    }
    written.push(path);
  }
  return written;
}
