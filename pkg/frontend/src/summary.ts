/**
 * summary.md generation.
 *
 * Every aggregate quantity is recomputed from the raw cycle streams and
 * cross-checked against summary.csv before anything is written; a
 * disagreement aborts the report naming the offending field. The Wilcoxon
 * table is displayed verbatim from stats.json, no statistics are computed
 * here beyond the re-aggregation.
 */

import Papa from "papaparse";

import { aggregateRuns, POOLED_SEED, type QuantRow } from "./aggregate.js";
import { SchemaError, type CyclesRun } from "./cycles.js";

export class DataError extends Error {}

const CHECK_TOLERANCE = 5e-4;

export interface SummaryCsv {
  columns: string[];
  rows: Array<Record<string, string>>;
}

function summaryColumns(qualityNames: string[]): string[] {
  return [
    "approach",
    "seed",
    "n_cycles",
    "aasr_pct",
    "overhead_pct",
    "time_saved_pct",
    "violations_pct",
    ...qualityNames.map((n) => `penalty_${n}`),
    ...qualityNames.map((n) => `mean_${n}`),
    "flags",
  ];
}

export function parseSummaryCsv(text: string, qualityNames: string[]): SummaryCsv {
  const parsed = Papa.parse<string[]>(text.trim(), { delimiter: "," });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`summary.csv: ${parsed.errors[0]!.message}`);
  }
  const [header, ...body] = parsed.data;
  const expected = summaryColumns(qualityNames);
  if (header === undefined) throw new SchemaError("summary.csv: empty file");
  for (let i = 0; i < Math.max(header.length, expected.length); i++) {
    if (header[i] !== expected[i]) {
      throw new SchemaError(
        `summary.csv: expected column ${JSON.stringify(expected[i] ?? "<end>")} ` +
          `at position ${i}, found ${JSON.stringify(header[i] ?? "<end>")}`,
      );
    }
  }
  const rows = body.map((cells, r) => {
    if (cells.length !== expected.length) {
      throw new SchemaError(
        `summary.csv row ${r + 2}: expected ${expected.length} cells, found ${cells.length}`,
      );
    }
    return Object.fromEntries(expected.map((name, i) => [name, cells[i]!]));
  });
  return { columns: expected, rows };
}

function parseNumberCell(value: string, context: string): number {
  if (value === "nan") return NaN;
  if (value === "inf") return Infinity;
  if (value === "-inf") return -Infinity;
  const n = Number(value);
  if (value.trim() === "" || Number.isNaN(n)) {
    throw new SchemaError(`${context}: not a number: ${JSON.stringify(value)}`);
  }
  return n;
}

function close(a: number, b: number): boolean {
  if (Number.isNaN(a) && Number.isNaN(b)) return true;
  return Math.abs(a - b) <= CHECK_TOLERANCE;
}

/** Recomputes every summary.csv quantity from the cycle streams and fails
 * on the first field the two disagree about. Returns the recomputed rows. */
export function crossCheckSummary(runs: CyclesRun[], summaryText: string): QuantRow[] {
  const qualityNames = runs[0]!.qualityNames;
  const ours = aggregateRuns(runs);
  const theirs = parseSummaryCsv(summaryText, qualityNames);
  if (theirs.rows.length !== ours.length) {
    throw new DataError(
      `summary.csv has ${theirs.rows.length} rows but the cycle streams ` +
        `re-aggregate to ${ours.length}`,
    );
  }
  ours.forEach((mine, i) => {
    const csv = theirs.rows[i]!;
    const where = `summary.csv row ${i + 2} (${csv["approach"]}, seed ${csv["seed"]})`;
    if (csv["approach"] !== mine.approach || Number(csv["seed"]) !== mine.seed) {
      throw new DataError(
        `${where}: expected approach ${mine.approach} seed ${mine.seed} at this position`,
      );
    }
    const fields: Array<[string, number]> = [
      ["n_cycles", mine.nCycles],
      ["aasr_pct", mine.aasrPct],
      ["overhead_pct", mine.overheadPct],
      ["time_saved_pct", mine.timeSavedPct],
      ["violations_pct", mine.violationsPct],
      ...qualityNames.map((n): [string, number] => [`penalty_${n}`, mine.penalty[n]!]),
      ...qualityNames.map((n): [string, number] => [`mean_${n}`, mine.mean[n]!]),
    ];
    for (const [field, recomputed] of fields) {
      const reported = parseNumberCell(csv[field]!, `${where}, column ${field}`);
      if (!close(recomputed, reported)) {
        throw new DataError(
          `${where}: ${field} mismatch, recomputed ${recomputed} vs summary.csv ${reported}`,
        );
      }
    }
  });
  return ours;
}

export function fmt3(value: number): string {
  if (Number.isNaN(value)) return "n/a";
  const s = value.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

function fmtP(value: number): string {
  if (Number.isNaN(value)) return "n/a";
  return value >= 0.0005 ? value.toFixed(3) : value.toExponential(2);
}

function tableLines(header: string[], rows: string[][]): string[] {
  return [
    `| ${header.join(" | ")} |`,
    `| ${header.map(() => "---").join(" | ")} |`,
    ...rows.map((cells) => `| ${cells.join(" | ")} |`),
  ];
}

interface WilcoxonEntry {
  n_pairs?: number;
  learned_mean?: number;
  other_mean?: number;
  p_value?: number;
  significant?: boolean;
  error?: string;
}

export interface StatsJson {
  schema_version?: number;
  wilcoxon?: Record<string, Record<string, WilcoxonEntry>>;
}

export function buildSummaryMd(
  scenario: string,
  rows: QuantRow[],
  qualityNames: string[],
  stats: StatsJson | null,
): string {
  const lines: string[] = [`# ${scenario} run report`, ""];
  lines.push(
    "All quantities below are recomputed from the raw cycles CSV files;",
    "the recomputation matched summary.csv for every field.",
    "",
    "## Aggregates",
    "",
  );
  const header = [
    "approach",
    "seed",
    "cycles",
    "aasr_pct",
    "overhead_pct",
    "time_saved_pct",
    "violations_pct",
    ...qualityNames.map((n) => `penalty_${n}`),
    ...qualityNames.map((n) => `mean_${n}`),
  ];
  const body = rows.map((r) => [
    r.approach,
    r.seed === POOLED_SEED ? "all" : String(r.seed),
    String(r.nCycles),
    fmt3(r.aasrPct),
    fmt3(r.overheadPct),
    fmt3(r.timeSavedPct),
    fmt3(r.violationsPct),
    ...qualityNames.map((n) => fmt3(r.penalty[n]!)),
    ...qualityNames.map((n) => fmt3(r.mean[n]!)),
  ]);
  lines.push(...tableLines(header, body), "");

  const comparisons = Object.entries(stats?.wilcoxon ?? {});
  if (comparisons.length > 0) {
    lines.push("## Wilcoxon signed-rank tests (from stats.json)", "");
    const wilcoxonRows: string[][] = [];
    for (const [comparison, byQuality] of comparisons) {
      for (const [quality, entry] of Object.entries(byQuality)) {
        if (entry.error !== undefined) {
          wilcoxonRows.push([comparison, quality, "n/a", "n/a", "n/a", "n/a", entry.error]);
          continue;
        }
        wilcoxonRows.push([
          comparison,
          quality,
          String(entry.n_pairs),
          fmt3(entry.learned_mean!),
          fmt3(entry.other_mean!),
          fmtP(entry.p_value!),
          entry.significant ? "significant" : "not significant",
        ]);
      }
    }
    lines.push(
      ...tableLines(
        ["comparison", "quality", "pairs", "learned mean", "other mean", "p value", "verdict"],
        wilcoxonRows,
      ),
      "",
    );
  }
  return lines.join("\n");
}
