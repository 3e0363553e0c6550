/**
 * Re-aggregation of cycle streams into the quantities summary.csv reports.
 *
 * The formulas mirror the harness exactly: testing cycles only, space
 * reduction as a ratio of means, per-cycle learning share averaged, time
 * saved against exhaustive verification, violation rate over the point
 * goals, and mean absolute quality gap to the co-executed reference
 * optimum ("utility penalty").
 */

import type { CycleRow, CyclesRun } from "./cycles.js";

export const POOLED_SEED = -1;

export interface QuantRow {
  approach: string;
  seed: number;
  nCycles: number;
  aasrPct: number;
  overheadPct: number;
  timeSavedPct: number;
  violationsPct: number;
  penalty: Record<string, number>;
  mean: Record<string, number>;
}

const mean = (xs: number[]) => xs.reduce((a, b) => a + b, 0) / xs.length;

export function testingRows(run: CyclesRun): CycleRow[] {
  return run.rows.filter((r) => r.mode === "testing");
}

export function quantRow(
  approach: string,
  seed: number,
  rows: CycleRow[],
  qualityNames: string[],
): QuantRow {
  const row: QuantRow = {
    approach,
    seed,
    nCycles: rows.length,
    aasrPct: NaN,
    overheadPct: NaN,
    timeSavedPct: NaN,
    violationsPct: NaN,
    penalty: {},
    mean: {},
  };
  if (rows.length === 0) {
    for (const name of qualityNames) {
      row.penalty[name] = NaN;
      row.mean[name] = NaN;
    }
    return row;
  }
  row.aasrPct = (1 - mean(rows.map((r) => r.nVerified)) / mean(rows.map((r) => r.nTotal))) * 100;
  row.overheadPct =
    mean(
      rows.map((r) => {
        const total = r.tLearnRealMs + r.tReducedSimMs;
        return total > 0 ? r.tLearnRealMs / total : 0;
      }),
    ) * 100;
  row.timeSavedPct = rows.some((r) => r.tTotalSimMs <= 0)
    ? NaN
    : mean(rows.map((r) => 1 - (r.tReducedSimMs + r.tLearnRealMs) / r.tTotalSimMs)) * 100;
  row.violationsPct = mean(rows.map((r) => (r.satisfied.every(Boolean) ? 0 : 1))) * 100;
  qualityNames.forEach((name, q) => {
    row.penalty[name] = mean(rows.map((r) => Math.abs(r.oracle[q]! - r.qualities[q]!)));
    row.mean[name] = mean(rows.map((r) => r.qualities[q]!));
  });
  return row;
}

const APPROACH_ORDER = new Map([
  ["learned", 0],
  ["reference", 1],
  ["random", 2],
]);

export function groupByApproach(runs: CyclesRun[]): Map<string, CyclesRun[]> {
  const groups = new Map<string, CyclesRun[]>();
  for (const run of runs) {
    const group = groups.get(run.approach) ?? [];
    group.push(run);
    groups.set(run.approach, group);
  }
  for (const group of groups.values()) {
    group.sort((a, b) => a.seed - b.seed);
  }
  const ordered = [...groups.keys()].sort((a, b) => {
    const ka = APPROACH_ORDER.get(a) ?? 3;
    const kb = APPROACH_ORDER.get(b) ?? 3;
    return ka === kb ? (a < b ? -1 : 1) : ka - kb;
  });
  return new Map(ordered.map((k) => [k, groups.get(k)!]));
}

/** One row per run plus a pooled row per multi-run approach, in the
 * harness's summary.csv order. */
export function aggregateRuns(runs: CyclesRun[]): QuantRow[] {
  const qualityNames = runs[0]!.qualityNames;
  const out: QuantRow[] = [];
  for (const [approach, group] of groupByApproach(runs)) {
    for (const run of group) {
      out.push(quantRow(approach, run.seed, testingRows(run), qualityNames));
    }
    if (group.length > 1) {
      const pooled = group.flatMap((run) => testingRows(run));
      out.push(quantRow(`${approach}-pooled`, POOLED_SEED, pooled, qualityNames));
    }
  }
  return out;
}

/** cycle -> mean of `pick` across an approach's runs, over every cycle. */
export function perCycleSeries(
  group: CyclesRun[],
  pick: (row: CycleRow) => number,
): Array<{ cycle: number; value: number }> {
  const sums = new Map<number, { total: number; count: number }>();
  for (const run of group) {
    for (const row of run.rows) {
      const entry = sums.get(row.cycle) ?? { total: 0, count: 0 };
      entry.total += pick(row);
      entry.count += 1;
      sums.set(row.cycle, entry);
    }
  }
  return [...sums.entries()]
    .map(([cycle, { total, count }]) => ({ cycle, value: total / count }))
    .sort((a, b) => a.cycle - b.cycle);
}
