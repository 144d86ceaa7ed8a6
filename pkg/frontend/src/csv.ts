/**
 * CSV ingestion for the dqsearch data files.
 *
 * Files start with `# generated=<timestamp>` comment lines, then an exact
 * schema header, then numeric/string rows.  A file whose header does not
 * match the documented schema is refused outright.
 */

import { readFileSync } from "fs";

export const FIG2A_SCHEMA = [
  "regime",
  "n",
  "N",
  "engine",
  "mixing_time",
  "alpha_star_re",
  "alpha_star_im",
] as const;

export const DYNAMICS_SCHEMA = ["regime", "engine", "n", "t", "ground_overlap"] as const;

export const TROTTER_SCHEMA = ["p", "r", "tau", "trace_error"] as const;

export type Row = Record<string, string>;

export interface Table {
  path: string;
  columns: string[];
  rows: Row[];
}

export class SchemaError extends Error {}

export function parseCsv(text: string, path: string, schema: readonly string[]): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.length > 0 && !line.startsWith("#"));
  if (lines.length === 0) {
    throw new SchemaError(`${path}: no header line found`);
  }
  const header = lines[0]!.split(",");
  if (header.length !== schema.length || schema.some((c, i) => header[i] !== c)) {
    throw new SchemaError(
      `${path}: header [${header.join(",")}] does not match schema [${schema.join(",")}]`
    );
  }
  const rows: Row[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== schema.length) {
      throw new SchemaError(`${path}: row has ${cells.length} cells, expected ${schema.length}`);
    }
    const row: Row = {};
    schema.forEach((c, i) => {
      row[c] = cells[i]!;
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return { path, columns: [...schema], rows };
}

export function readCsv(path: string, schema: readonly string[]): Table {
  return parseCsv(readFileSync(path, "utf-8"), path, schema);
}

export function numbers(table: Table, column: string): number[] {
  return table.rows.map((row) => {
    const value = Number(row[column]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(`${table.path}: non-numeric value in column ${column}`);
    }
    return value;
  });
}
