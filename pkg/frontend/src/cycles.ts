/**
 * Cycle CSV loading and schema validation.
 *
 * The benchmark harness writes one cycles CSV per (approach, seed) with a
 * pinned column layout: nine fixed lead columns, a q_<quality> block, a
 * mirrored q_o_<quality> block (the co-executed reference optimum), three
 * timing columns and a sat_<goal> block. Anything else is a schema
 * mismatch and the error names the offending column.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface CycleRow {
  cycle: number;
  mode: string;
  nTotal: number;
  nFiltered: number;
  nExplored: number;
  nVerified: number;
  chosenId: number;
  /** chosen option's measured qualities, aligned with qualityNames */
  qualities: number[];
  /** reference optimum's qualities, same alignment */
  oracle: number[];
  tTotalSimMs: number;
  tReducedSimMs: number;
  tLearnRealMs: number;
  /** per point-goal satisfaction flags, aligned with goalNames */
  satisfied: boolean[];
}

export interface CyclesRun {
  file: string;
  approach: string;
  seed: number;
  qualityNames: string[];
  goalNames: string[];
  rows: CycleRow[];
}

const LEAD_COLUMNS = [
  "cycle",
  "approach",
  "seed",
  "mode",
  "n_total",
  "n_filtered",
  "n_explored",
  "n_verified",
  "chosen_id",
] as const;

const TIME_COLUMNS = ["t_total_sim_ms", "t_reduced_sim_ms", "t_learn_real_ms"] as const;

function fail(file: string, message: string): never {
  throw new SchemaError(`${path.basename(file)}: ${message}`);
}

/** Splits the header into the pinned blocks, or throws naming the column. */
export function validateHeader(
  file: string,
  header: string[],
): { qualityNames: string[]; goalNames: string[] } {
  for (let i = 0; i < LEAD_COLUMNS.length; i++) {
    if (header[i] !== LEAD_COLUMNS[i]) {
      fail(file, `expected column "${LEAD_COLUMNS[i]}" at position ${i}, found "${header[i] ?? "<missing>"}"`);
    }
  }
  let pos = LEAD_COLUMNS.length;
  const qualityNames: string[] = [];
  while (pos < header.length) {
    const col = header[pos]!;
    if (!col.startsWith("q_") || col.startsWith("q_o_")) break;
    qualityNames.push(col.slice(2));
    pos++;
  }
  if (qualityNames.length === 0) {
    fail(file, `expected a "q_<quality>" column at position ${pos}, found "${header[pos] ?? "<missing>"}"`);
  }
  for (const name of qualityNames) {
    const col = header[pos];
    if (col !== `q_o_${name}`) {
      fail(file, `expected column "q_o_${name}" at position ${pos}, found "${col ?? "<missing>"}"`);
    }
    pos++;
  }
  for (const expected of TIME_COLUMNS) {
    if (header[pos] !== expected) {
      fail(file, `expected column "${expected}" at position ${pos}, found "${header[pos] ?? "<missing>"}"`);
    }
    pos++;
  }
  const goalNames: string[] = [];
  for (; pos < header.length; pos++) {
    const col = header[pos]!;
    if (!col.startsWith("sat_")) {
      fail(file, `unexpected column "${col}" at position ${pos}`);
    }
    goalNames.push(col.slice(4));
  }
  return { qualityNames, goalNames };
}

function parseNumber(file: string, line: number, column: string, raw: string): number {
  const value = Number(raw);
  if (raw === "" || !Number.isFinite(value)) {
    fail(file, `row ${line}: column "${column}" is not a finite number (got "${raw}")`);
  }
  return value;
}

function parseFlag(file: string, line: number, column: string, raw: string): boolean {
  if (raw !== "0" && raw !== "1") {
    fail(file, `row ${line}: column "${column}" must be 0 or 1 (got "${raw}")`);
  }
  return raw === "1";
}

export function parseCyclesCsv(file: string, text: string): CyclesRun {
  const parsed = Papa.parse<string[]>(text.trim(), { delimiter: "," });
  if (parsed.errors.length > 0) {
    fail(file, `CSV parse error: ${parsed.errors[0]!.message}`);
  }
  const records = parsed.data;
  const header = records[0];
  if (!header) fail(file, "empty file");
  const { qualityNames, goalNames } = validateHeader(file, header);
  const width = header.length;
  if (records.length < 2) fail(file, "no cycle rows");

  const index = new Map(header.map((name, i) => [name, i]));
  const col = (row: string[], name: string) => row[index.get(name)!]!;

  const rows: CycleRow[] = [];
  let approach = "";
  let seed = 0;
  for (let r = 1; r < records.length; r++) {
    const record = records[r]!;
    if (record.length !== width) {
      fail(file, `row ${r}: expected ${width} fields, found ${record.length}`);
    }
    const num = (name: string) => parseNumber(file, r, name, col(record, name));
    const mode = col(record, "mode");
    if (mode !== "training" && mode !== "testing") {
      fail(file, `row ${r}: column "mode" must be training or testing (got "${mode}")`);
    }
    if (r === 1) {
      approach = col(record, "approach");
      seed = num("seed");
    } else if (col(record, "approach") !== approach || num("seed") !== seed) {
      fail(file, `row ${r}: mixed approach/seed values in one file`);
    }
    rows.push({
      cycle: num("cycle"),
      mode,
      nTotal: num("n_total"),
      nFiltered: num("n_filtered"),
      nExplored: num("n_explored"),
      nVerified: num("n_verified"),
      chosenId: num("chosen_id"),
      qualities: qualityNames.map((n) => num(`q_${n}`)),
      oracle: qualityNames.map((n) => num(`q_o_${n}`)),
      tTotalSimMs: num("t_total_sim_ms"),
      tReducedSimMs: num("t_reduced_sim_ms"),
      tLearnRealMs: num("t_learn_real_ms"),
      satisfied: goalNames.map((n) => parseFlag(file, r, `sat_${n}`, col(record, `sat_${n}`))),
    });
  }
  return { file, approach, seed, qualityNames, goalNames, rows };
}

export function loadCyclesRun(file: string): CyclesRun {
  return parseCyclesCsv(file, fs.readFileSync(file, "utf8"));
}

/** All cycles_*.csv runs in a directory, sorted by (approach, seed). */
export function loadRunDirectory(dir: string): CyclesRun[] {
  let names: string[];
  try {
    names = fs.readdirSync(dir);
  } catch {
    throw new SchemaError(`${dir}: not a readable directory`);
  }
  const files = names.filter((n) => n.startsWith("cycles_") && n.endsWith(".csv")).sort();
  if (files.length === 0) {
    throw new SchemaError(`${dir}: no cycles_*.csv files`);
  }
  const runs = files.map((n) => loadCyclesRun(path.join(dir, n)));
  const reference = runs[0]!;
  for (const run of runs) {
    if (
      run.qualityNames.length !== reference.qualityNames.length ||
      run.qualityNames.some((n, i) => n !== reference.qualityNames[i])
    ) {
      fail(run.file, `quality columns disagree with ${path.basename(reference.file)}`);
    }
  }
  runs.sort((a, b) =>
    a.approach === b.approach ? a.seed - b.seed : a.approach < b.approach ? -1 : 1,
  );
  return runs;
}
