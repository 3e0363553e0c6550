/**
 * Deterministic SVG construction: no timestamps, no randomness, numbers
 * printed with a fixed precision so identical inputs give identical bytes.
 */

import { ticks } from "d3-array";

export function fmt(n: number): string {
  const rounded = Math.round(n * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export type Attrs = Record<string, string | number>;

function attrString(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join("");
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, attrs: Attrs = {}): this {
    this.parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}"${attrString(attrs)}/>`);
    return this;
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs = {}): this {
    this.parts.push(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}"${attrString(attrs)}/>`);
    return this;
  }

  polyline(points: Array<[number, number]>, attrs: Attrs = {}): this {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polyline points="${path}" fill="none"${attrString(attrs)}/>`);
    return this;
  }

  circle(cx: number, cy: number, r: number, attrs: Attrs = {}): this {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}"${attrString(attrs)}/>`);
    return this;
  }

  text(x: number, y: number, content: string, attrs: Attrs = {}): this {
    const base: Attrs = { "font-family": "DejaVu Sans, sans-serif", "font-size": 11, ...attrs };
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}"${attrString(base)}>${escapeText(content)}</text>`);
    return this;
  }

  toString(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  tickCount = 6,
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.ticks = () => ticks(d0, d1, tickCount);
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs a positive domain");
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const scale = ((value: number) => r0 + ((Math.log10(value) - l0) / span) * (r1 - r0)) as Scale;
  scale.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); Math.pow(10, e) <= d1 * (1 + 1e-9); e++) {
      out.push(Math.pow(10, e));
    }
    return out.length >= 2 ? out : [d0, d1];
  };
  return scale;
}

/** Compact y-axis tick labels: 13500 -> "13.5k", 0.05 -> "0.05". */
export function tickLabel(value: number): string {
  if (Math.abs(value) >= 10000) {
    const k = value / 1000;
    return `${Number.isInteger(k) ? k : Math.round(k * 10) / 10}k`;
  }
  return String(Math.round(value * 1000) / 1000);
}

export const APPROACH_COLORS: Record<string, string> = {
  learned: "#1f77b4",
  reference: "#2ca02c",
  random: "#d62728",
};

export function approachColor(approach: string): string {
  return APPROACH_COLORS[approach.replace(/-pooled$/, "")] ?? "#7f7f7f";
}
