/**
 * Figure assembly from dqsearch CSV files.
 *
 * Three kinds are supported: `fig2a` (log-log mixing-time scalings with
 * refitted slope annotations), `fig2b` (ground-overlap dynamics overlays,
 * truncated at the 0.95 stop line by the producer), and `trotter` (log-log
 * step-error sweep with a slope annotation).  Rendering never mutates the
 * inputs and is byte-deterministic for identical inputs.
 */

import { writeFileSync } from "fs";

import {
  DYNAMICS_SCHEMA,
  FIG2A_SCHEMA,
  TROTTER_SCHEMA,
  Table,
  numbers,
  readCsv,
} from "./csv.js";
import { logLogSlope } from "./fit.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  Scene,
  WIDTH,
  decadeTicks,
  frame,
  linearScale,
  linearTicks,
  logScale,
} from "./svg.js";

export type FigureKind = "fig2a" | "fig2b" | "trotter";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
}

/** Trailing points used for the presentation-level slope refit; matches the
 * asymptotic-window convention of the producer's exponent table. */
export const SLOPE_WINDOW = 11;

const X0 = MARGIN.left;
const X1 = WIDTH - MARGIN.right;
const Y0 = HEIGHT - MARGIN.bottom;
const Y1 = MARGIN.top;

function seriesLabel(table: Table): string {
  const first = table.rows[0]!;
  if ("engine" in first && "regime" in first) {
    return `${first["regime"]} ${first["engine"]}`;
  }
  return table.path.replace(/^.*\//, "").replace(/\.csv$/, "");
}

export interface SlopeAnnotation {
  label: string;
  slope: number;
}

export function fig2aSlopes(tables: Table[]): SlopeAnnotation[] {
  return tables.map((t) => ({
    label: seriesLabel(t),
    slope: logLogSlope(numbers(t, "N"), numbers(t, "mixing_time"), SLOPE_WINDOW),
  }));
}

function renderFig2a(tables: Table[]): string {
  const scene = new Scene();
  const xsAll = tables.flatMap((t) => numbers(t, "N"));
  const ysAll = tables.flatMap((t) => numbers(t, "mixing_time"));
  const xScale = logScale(Math.min(...xsAll), Math.max(...xsAll), X0, X1);
  const yScale = logScale(Math.min(...ysAll), Math.max(...ysAll), Y0, Y1);
  frame(
    scene,
    xScale,
    yScale,
    decadeTicks(Math.min(...xsAll), Math.max(...xsAll)),
    decadeTicks(Math.min(...ysAll), Math.max(...ysAll)),
    "search-space size N",
    "mixing time",
    (v) => formatPow10(v)
  );
  const slopes = fig2aSlopes(tables);
  tables.forEach((t, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const xs = numbers(t, "N");
    const ys = numbers(t, "mixing_time");
    const pts = xs.map((x, k) => [xScale(x), yScale(ys[k]!)] as [number, number]);
    scene.polyline(pts, color);
    for (const [px, py] of pts) {
      scene.circle(px, py, 2.4, color);
    }
    const ann = slopes[i]!;
    scene.text(X0 + 12, Y1 + 18 + 18 * i, `${ann.label}: slope ${ann.slope.toFixed(2)}`, {
      fill: color,
    });
  });
  return scene.render("Mixing-time scaling (log-log)");
}

function renderFig2b(tables: Table[]): string {
  const scene = new Scene();
  const xsAll = tables.flatMap((t) => numbers(t, "t"));
  const xHi = Math.max(...xsAll);
  const xScale = linearScale(0, xHi, X0, X1);
  const yScale = linearScale(0, 1, Y0, Y1);
  frame(
    scene,
    xScale,
    yScale,
    linearTicks(0, xHi),
    linearTicks(0, 1),
    "time",
    "ground overlap",
    (v) => trimNumber(v)
  );
  scene.line(X0, yScale(0.95), X1, yScale(0.95), "#999999");
  scene.text(X1 - 4, yScale(0.95) - 6, "0.95 stop", { anchor: "end", size: 11, fill: "#666666" });
  tables.forEach((t, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const xs = numbers(t, "t");
    const ys = numbers(t, "ground_overlap");
    const pts = xs.map((x, k) => [xScale(x), yScale(ys[k]!)] as [number, number]);
    scene.polyline(pts, color);
    const n = t.rows[0]!["n"];
    scene.text(X0 + 12, Y1 + 18 + 18 * i, `${seriesLabel(t)} (n=${n})`, { fill: color });
  });
  return scene.render("Ground-overlap dynamics");
}

function renderTrotter(tables: Table[]): string {
  const scene = new Scene();
  const table = tables[0]!;
  const xs = numbers(table, "tau");
  const ys = numbers(table, "trace_error");
  const xScale = logScale(Math.min(...xs), Math.max(...xs), X0, X1);
  const yScale = logScale(Math.min(...ys), Math.max(...ys), Y0, Y1);
  frame(
    scene,
    xScale,
    yScale,
    decadeTicks(Math.min(...xs), Math.max(...xs)),
    decadeTicks(Math.min(...ys), Math.max(...ys)),
    "time step tau",
    "trace-norm step error",
    (v) => formatPow10(v)
  );
  const color = PALETTE[0]!;
  const pts = xs.map((x, k) => [xScale(x), yScale(ys[k]!)] as [number, number]);
  scene.polyline(pts, color);
  for (const [px, py] of pts) {
    scene.circle(px, py, 2.4, color);
  }
  const slope = logLogSlope(xs, ys);
  const p = table.rows[0]!["p"];
  scene.text(X0 + 12, Y1 + 18, `order p=${p}: slope ${slope.toFixed(2)}`, { fill: color });
  return scene.render("Trotterized step error vs time step (log-log)");
}

export function trotterSlope(table: Table): number {
  return logLogSlope(numbers(table, "tau"), numbers(table, "trace_error"));
}

function formatPow10(v: number): string {
  const e = Math.log10(v);
  if (Number.isInteger(e)) {
    return `1e${e}`;
  }
  return trimNumber(v);
}

function trimNumber(v: number): string {
  return Number(v.toPrecision(4)).toString();
}

export function renderToString(spec: FigureSpec): string {
  if (spec.inputs.length === 0) {
    throw new Error("no input CSV files given");
  }
  const inputs = [...spec.inputs].sort();
  switch (spec.kind) {
    case "fig2a":
      return renderFig2a(inputs.map((p) => readCsv(p, FIG2A_SCHEMA)));
    case "fig2b":
      return renderFig2b(inputs.map((p) => readCsv(p, DYNAMICS_SCHEMA)));
    case "trotter":
      return renderTrotter(inputs.map((p) => readCsv(p, TROTTER_SCHEMA)));
    default:
      throw new Error(`unknown figure kind ${String(spec.kind)}`);
  }
}

/** Validate + render + write; nothing is written when rendering fails. */
export function render(spec: FigureSpec): void {
  const svg = renderToString(spec);
  writeFileSync(spec.output, svg);
}
