#!/usr/bin/env npx tsx
/**
 * Figure renderer CLI.
 *
 * Usage:
 *   npx tsx src/render.ts --kind fig2a --in out/fig2a_*.csv --out fig2a.svg
 *   npx tsx src/render.ts --kind fig2b --in out/fig2b_*.csv --out fig2b.svg
 *   npx tsx src/render.ts --kind trotter --in out/trotter_slope.csv --out trotter.svg
 */

import { FigureKind, FigureSpec, render } from "./figures.js";

function parseArgs(argv: string[]): FigureSpec {
  let kind: string | undefined;
  let output: string | undefined;
  const inputs: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    if (arg === "--kind") {
      kind = argv[++i];
    } else if (arg === "--out") {
      output = argv[++i];
    } else if (arg === "--in") {
      while (i + 1 < argv.length && !argv[i + 1]!.startsWith("--")) {
        inputs.push(argv[++i]!);
      }
    } else {
      throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!kind || !["fig2a", "fig2b", "trotter"].includes(kind)) {
    throw new Error("--kind must be one of fig2a, fig2b, trotter");
  }
  if (!output) {
    throw new Error("--out is required");
  }
  if (inputs.length === 0) {
    throw new Error("--in requires at least one CSV path");
  }
  return { kind: kind as FigureKind, inputs, output };
}

function main(): number {
  try {
    const spec = parseArgs(process.argv.slice(2));
    render(spec);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exit(main());
