/**
 * The four report figures, drawn onto the deterministic SVG builder.
 *
 * Timeseries figures show every cycle (training and testing) with the
 * warm-up boundary marked; multi-run approaches are averaged per cycle.
 * The utility boxplot pools testing cycles per approach.
 */

import { quantileSorted } from "d3-array";

import { groupByApproach, perCycleSeries, testingRows } from "./aggregate.js";
import type { CycleRow, CyclesRun } from "./cycles.js";
import { Svg, approachColor, linearScale, logScale, tickLabel, type Scale } from "./svg.js";

export const FIGURE_NAMES = [
  "boxplot-utility",
  "space-timeseries",
  "time-timeseries",
  "overhead-timeseries",
] as const;

export type FigureName = (typeof FIGURE_NAMES)[number];

const WIDTH = 760;
const MARGIN = { top: 34, right: 20, bottom: 42, left: 64 };

interface Series {
  label: string;
  color: string;
  points: Array<{ cycle: number; value: number }>;
}

function collectSeries(runs: CyclesRun[], pick: (row: CycleRow) => number): Series[] {
  const out: Series[] = [];
  for (const [approach, group] of groupByApproach(runs)) {
    const label = group.length > 1 ? `${approach} (mean of ${group.length})` : approach;
    out.push({ label, color: approachColor(approach), points: perCycleSeries(group, pick) });
  }
  return out;
}

function warmupBoundary(runs: CyclesRun[]): number | null {
  for (const run of runs) {
    if (run.approach !== "learned") continue;
    const first = run.rows.find((r) => r.mode === "testing");
    if (first && run.rows.some((r) => r.mode === "training")) return first.cycle;
  }
  return null;
}

function makeYScale(values: number[], range: [number, number]): Scale {
  const finite = values.filter(Number.isFinite);
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  if (lo > 0 && hi / lo > 50) return logScale([lo, hi], range);
  const pad = (hi - lo) * 0.05;
  return linearScale([Math.max(0, lo - pad), hi + pad], range);
}

function drawAxes(
  svg: Svg,
  height: number,
  x: Scale,
  y: Scale,
  title: string,
  xLabel: string,
  yLabel: string,
): void {
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = height - MARGIN.bottom;
  svg.text(left, top - 14, title, { "font-size": 13, "font-weight": "bold" });
  for (const tick of y.ticks()) {
    const py = y(tick);
    if (py < top - 1 || py > bottom + 1) continue;
    svg.line(left, py, right, py, { stroke: "#e0e0e0", "stroke-width": 0.6 });
    svg.text(left - 7, py + 3.5, tickLabel(tick), { "text-anchor": "end" });
  }
  for (const tick of x.ticks()) {
    const px = x(tick);
    svg.line(px, bottom, px, bottom + 4, { stroke: "#333", "stroke-width": 1 });
    svg.text(px, bottom + 16, tickLabel(tick), { "text-anchor": "middle" });
  }
  svg.line(left, bottom, right, bottom, { stroke: "#333", "stroke-width": 1 });
  svg.line(left, top, left, bottom, { stroke: "#333", "stroke-width": 1 });
  svg.text((left + right) / 2, height - 8, xLabel, { "text-anchor": "middle" });
  svg.text(14, (top + bottom) / 2, yLabel, {
    "text-anchor": "middle",
    transform: `rotate(-90 14 ${(top + bottom) / 2})`,
  });
}

function drawLegend(svg: Svg, series: Series[]): void {
  const entryWidth = 150;
  let px = WIDTH - MARGIN.right - series.length * entryWidth;
  for (const s of series) {
    svg.line(px, MARGIN.top - 18, px + 16, MARGIN.top - 18, { stroke: s.color, "stroke-width": 2 });
    svg.text(px + 21, MARGIN.top - 14, s.label);
    px += entryWidth;
  }
}

function timeseriesFigure(
  runs: CyclesRun[],
  pick: (row: CycleRow) => number,
  title: string,
  yLabel: string,
): string {
  const height = 330;
  const series = collectSeries(runs, pick);
  const cycles = series.flatMap((s) => s.points.map((p) => p.cycle));
  const values = series.flatMap((s) => s.points.map((p) => p.value));
  const x = linearScale([Math.min(...cycles), Math.max(...cycles)], [MARGIN.left, WIDTH - MARGIN.right], 8);
  const y = makeYScale(values, [height - MARGIN.bottom, MARGIN.top]);

  const svg = new Svg(WIDTH, height);
  drawAxes(svg, height, x, y, title, "cycle", yLabel);
  const boundary = warmupBoundary(runs);
  if (boundary !== null) {
    const px = x(boundary);
    svg.line(px, MARGIN.top, px, height - MARGIN.bottom, {
      stroke: "#888",
      "stroke-width": 1,
      "stroke-dasharray": "4 3",
    });
    svg.text(px + 4, MARGIN.top + 10, "testing", { fill: "#666" });
  }
  for (const s of series) {
    svg.polyline(
      s.points.map((p) => [x(p.cycle), y(p.value)]),
      { stroke: s.color, "stroke-width": 1.4 },
    );
  }
  drawLegend(svg, series);
  return svg.toString();
}

export function spaceTimeseries(runs: CyclesRun[], title: string): string {
  return timeseriesFigure(runs, (r) => r.nVerified, title, "verified options");
}

export function timeTimeseries(runs: CyclesRun[], title: string): string {
  return timeseriesFigure(
    runs,
    (r) => r.tReducedSimMs + r.tLearnRealMs,
    title,
    "adaptation time (ms)",
  );
}

export function overheadTimeseries(runs: CyclesRun[], title: string): string {
  return timeseriesFigure(
    runs,
    (r) => {
      const total = r.tLearnRealMs + r.tReducedSimMs;
      return total > 0 ? (r.tLearnRealMs / total) * 100 : 0;
    },
    title,
    "learning overhead (%)",
  );
}

interface BoxStats {
  label: string;
  color: string;
  q1: number;
  median: number;
  q3: number;
  low: number;
  high: number;
  outliers: number[];
}

export function boxStats(values: number[]): Omit<BoxStats, "label" | "color"> {
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantileSorted(sorted, 0.25)!;
  const median = quantileSorted(sorted, 0.5)!;
  const q3 = quantileSorted(sorted, 0.75)!;
  const fence = 1.5 * (q3 - q1);
  const low = sorted.find((v) => v >= q1 - fence)!;
  const high = [...sorted].reverse().find((v) => v <= q3 + fence)!;
  return { q1, median, q3, low, high, outliers: sorted.filter((v) => v < low || v > high) };
}

export function boxplotUtility(runs: CyclesRun[], title: string): string {
  const qualityNames = runs[0]!.qualityNames;
  const groups = groupByApproach(runs);
  const panelHeight = 190;
  const height = MARGIN.top + qualityNames.length * panelHeight + 10;
  const svg = new Svg(WIDTH, height);
  svg.text(MARGIN.left, MARGIN.top - 14, title, { "font-size": 13, "font-weight": "bold" });

  qualityNames.forEach((quality, q) => {
    const stats: BoxStats[] = [];
    for (const [approach, group] of groups) {
      const penalties = group
        .flatMap((run) => testingRows(run))
        .map((row) => Math.abs(row.oracle[q]! - row.qualities[q]!));
      if (penalties.length === 0) continue;
      stats.push({
        label: group.length > 1 ? `${approach} (${group.length} runs)` : approach,
        color: approachColor(approach),
        ...boxStats(penalties),
      });
    }
    const top = MARGIN.top + q * panelHeight + 14;
    const bottom = top + panelHeight - 58;
    const values = stats.flatMap((s) => [s.low, s.high, ...s.outliers]);
    const y = makeYScale(values, [bottom, top]);
    const left = MARGIN.left;
    const right = WIDTH - MARGIN.right;

    for (const tick of y.ticks()) {
      const py = y(tick);
      if (py < top - 1 || py > bottom + 1) continue;
      svg.line(left, py, right, py, { stroke: "#e0e0e0", "stroke-width": 0.6 });
      svg.text(left - 7, py + 3.5, tickLabel(tick), { "text-anchor": "end" });
    }
    svg.line(left, bottom, right, bottom, { stroke: "#333", "stroke-width": 1 });
    svg.line(left, top, left, bottom, { stroke: "#333", "stroke-width": 1 });
    svg.text(14, (top + bottom) / 2, `penalty ${quality}`, {
      "text-anchor": "middle",
      transform: `rotate(-90 14 ${(top + bottom) / 2})`,
    });

    const slot = (right - left) / stats.length;
    const boxWidth = Math.min(70, slot * 0.4);
    stats.forEach((s, i) => {
      const cx = left + slot * (i + 0.5);
      svg.line(cx, y(s.low), cx, y(s.q1), { stroke: s.color, "stroke-width": 1 });
      svg.line(cx, y(s.q3), cx, y(s.high), { stroke: s.color, "stroke-width": 1 });
      for (const w of [s.low, s.high]) {
        svg.line(cx - boxWidth / 4, y(w), cx + boxWidth / 4, y(w), { stroke: s.color, "stroke-width": 1 });
      }
      svg.rect(cx - boxWidth / 2, y(s.q3), boxWidth, Math.max(y(s.q1) - y(s.q3), 0.5), {
        fill: s.color,
        "fill-opacity": 0.25,
        stroke: s.color,
        "stroke-width": 1.2,
      });
      svg.line(cx - boxWidth / 2, y(s.median), cx + boxWidth / 2, y(s.median), {
        stroke: s.color,
        "stroke-width": 2,
      });
      for (const v of s.outliers) {
        svg.circle(cx, y(v), 1.6, { fill: "none", stroke: s.color, "stroke-width": 0.8 });
      }
      svg.text(cx, bottom + 16, s.label, { "text-anchor": "middle" });
    });
  });
  return svg.toString();
}

export function renderFigure(name: FigureName, runs: CyclesRun[], scenario: string): string {
  switch (name) {
    case "boxplot-utility":
      return boxplotUtility(runs, `${scenario}: utility penalty vs reference optimum`);
    case "space-timeseries":
      return spaceTimeseries(runs, `${scenario}: verified adaptation options per cycle`);
    case "time-timeseries":
      return timeTimeseries(runs, `${scenario}: adaptation time per cycle`);
    case "overhead-timeseries":
      return overheadTimeseries(runs, `${scenario}: learning overhead per cycle`);
  }
}
