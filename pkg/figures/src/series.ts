import Papa from "papaparse";

export interface SeriesTable {
  /** key = value echo lines from the top of the file */
  meta: Map<string, string>;
  columns: string[];
  rows: number[][];
}

const REQUIRED = ["step", "time", "rel_err_mean", "rel_err_member1"];

/** Parse a series CSV: `# key = value` echo lines, header row, data rows. */
export function parseSeries(text: string): SeriesTable {
  const lines = text.split(/\r?\n/);
  const meta = new Map<string, string>();
  let body = 0;
  for (; body < lines.length; body++) {
    const line = lines[body];
    if (!line.startsWith("#")) break;
    const eq = line.indexOf("=");
    if (eq > 0) {
      meta.set(line.slice(1, eq).trim(), line.slice(eq + 1).trim());
    }
  }
  const csv = lines.slice(body).join("\n");
  const parsed = Papa.parse<string[]>(csv.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new Error(`cannot parse CSV body: ${parsed.errors[0].message}`);
  }
  const grid = parsed.data;
  if (grid.length === 0) {
    throw new Error("no header row in series CSV");
  }
  const columns = grid[0];
  for (const name of REQUIRED) {
    if (!columns.includes(name)) {
      throw new Error(`series CSV is missing column ${name}`);
    }
  }
  const rows: number[][] = [];
  for (let i = 1; i < grid.length; i++) {
    if (grid[i].length !== columns.length) {
      throw new Error(
        `row ${i} has ${grid[i].length} cells, header has ${columns.length}`,
      );
    }
    const row = grid[i].map(Number);
    const bad = row.findIndex((v) => Number.isNaN(v));
    if (bad >= 0) {
      throw new Error(`row ${i}, column ${columns[bad]}: not a number`);
    }
    rows.push(row);
  }
  return { meta, columns, rows };
}

/** Tracked-mode tags ("m1_m2") in header order, from the u*_re columns. */
export function modeTags(table: SeriesTable): string[] {
  const tags: string[] = [];
  for (const name of table.columns) {
    const m = /^u(-?\d+_-?\d+)_re$/.exec(name);
    if (m) tags.push(m[1]);
  }
  return tags;
}

/** How many member overlays the CSV carries for a given mode tag. */
export function memberCount(table: SeriesTable, tag: string): number {
  let k = 0;
  while (table.columns.includes(`v${k + 1}_${tag}_re`)) k++;
  return k;
}

export function column(table: SeriesTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new Error(`no column ${name} in series CSV`);
  return table.rows.map((row) => row[idx]);
}
