import { readFileSync, writeFileSync } from "fs";

import { SeriesTable, column, memberCount, modeTags, parseSeries } from "./series.js";

export interface FigureSpec {
  csvPath: string;
  /** mode tags to panel, "m1_m2"; empty = every mode the CSV tracks */
  modes: string[];
  /** member overlays per panel */
  members: number;
  outPath: string;
  title?: string;
}

// fixed layout: two panel columns, panels appended row-major, the
// relative-error panel always last
const PANEL_W = 420;
const PANEL_H = 190;
const MARGIN = { left: 58, right: 14, top: 26, bottom: 34 };
const GAP = 18;
const HEADER = 34;

const TRUTH_RE = "#000000";
const TRUTH_IM = "#777777";
const MEMBER_RE = "#4878a8";
const MEMBER_IM = "#9ab8d8";
const ERR_MEAN = "#c0392b";
const ERR_MEMBER = "#2a6ea6";

function fmt(v: number): string {
  // pixel coordinates; two decimals keep paths compact and byte-stable
  return (Math.round(v * 100) / 100).toString();
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return parseFloat(v.toPrecision(4)).toString();
}

/** Tick positions at a 1-2-5 spacing covering [lo, hi]. */
export function linearTicks(lo: number, hi: number, want = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / want;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mult * mag >= raw) {
      step = mult * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

interface Scale {
  (v: number): number;
  lo: number;
  hi: number;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi === lo) {
    // degenerate data range: pad so constant series sit mid-panel
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  f.lo = lo;
  f.hi = hi;
  return f;
}

function path(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    pts.push(`${i === 0 ? "M" : "L"}${fmt(sx(xs[i]))},${fmt(sy(ys[i]))}`);
  }
  return pts.join("");
}

/** Path that skips non-positive values, for the log-scale error panel. */
function logPath(xs: number[], ys: number[], sx: Scale, syLog: Scale): string {
  const pts: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    if (ys[i] > 0) {
      pts.push(`${pen ? "L" : "M"}${fmt(sx(xs[i]))},${fmt(syLog(Math.log10(ys[i])))}`);
      pen = true;
    } else {
      pen = false;
    }
  }
  return pts.join("");
}

function axes(sx: Scale, sy: Scale, x0: number, y0: number, logY: boolean): string {
  const innerW = PANEL_W - MARGIN.left - MARGIN.right;
  const innerH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const parts: string[] = [];
  parts.push(
    `<rect x="${x0 + MARGIN.left}" y="${y0 + MARGIN.top}" width="${innerW}" ` +
      `height="${innerH}" fill="none" stroke="#999" stroke-width="1"/>`,
  );
  for (const t of linearTicks(sx.lo, sx.hi)) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${y0 + PANEL_H - MARGIN.bottom}" x2="${px}" ` +
        `y2="${y0 + PANEL_H - MARGIN.bottom + 4}" stroke="#555"/>`,
      `<text x="${px}" y="${y0 + PANEL_H - MARGIN.bottom + 16}" ` +
        `text-anchor="middle" font-size="10">${fmtTick(t)}</text>`,
    );
  }
  const yticks = logY
    ? rangeInt(Math.ceil(sy.lo), Math.floor(sy.hi)).map((d) => d)
    : linearTicks(sy.lo, sy.hi, 4);
  for (const t of yticks) {
    const py = fmt(sy(t));
    const label = logY ? `1e${t}` : fmtTick(t);
    parts.push(
      `<line x1="${x0 + MARGIN.left - 4}" y1="${py}" x2="${x0 + MARGIN.left}" ` +
        `y2="${py}" stroke="#555"/>`,
      `<text x="${x0 + MARGIN.left - 7}" y="${py}" text-anchor="end" ` +
        `dominant-baseline="middle" font-size="10">${label}</text>`,
    );
  }
  return parts.join("\n");
}

function rangeInt(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let v = lo; v <= hi; v++) out.push(v);
  return out;
}

function panelFrame(x0: number, y0: number, title: string): string {
  return (
    `<text x="${x0 + MARGIN.left}" y="${y0 + MARGIN.top - 8}" ` +
    `font-size="11" font-weight="bold">${title}</text>`
  );
}

/** One panel of truth + member trajectories for a tracked mode. */
function modePanel(
  table: SeriesTable,
  tag: string,
  members: number,
  time: number[],
  x0: number,
  y0: number,
): string {
  const series: { ys: number[]; stroke: string; dash: boolean; width: number; op: string }[] = [];
  for (let k = 1; k <= members; k++) {
    series.push({ ys: column(table, `v${k}_${tag}_re`), stroke: MEMBER_RE, dash: false, width: 1, op: "0.6" });
    series.push({ ys: column(table, `v${k}_${tag}_im`), stroke: MEMBER_IM, dash: true, width: 1, op: "0.6" });
  }
  series.push({ ys: column(table, `u${tag}_re`), stroke: TRUTH_RE, dash: false, width: 1.6, op: "1" });
  series.push({ ys: column(table, `u${tag}_im`), stroke: TRUTH_IM, dash: true, width: 1.6, op: "1" });

  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of s.ys) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  const sx = linearScale(time[0], time[time.length - 1], x0 + MARGIN.left, x0 + PANEL_W - MARGIN.right);
  const sy = linearScale(lo, hi, y0 + PANEL_H - MARGIN.bottom, y0 + MARGIN.top);
  const [m1, m2] = tag.split("_");
  const parts = [
    `<g class="panel" data-mode="${tag}">`,
    panelFrame(x0, y0, `mode (${m1}, ${m2})`),
    axes(sx, sy, x0, y0, false),
  ];
  for (const s of series) {
    parts.push(
      `<path d="${path(time, s.ys, sx, sy)}" fill="none" stroke="${s.stroke}" ` +
        `stroke-width="${s.width}" opacity="${s.op}"` +
        (s.dash ? ` stroke-dasharray="4 3"` : ``) +
        `/>`,
    );
  }
  parts.push(`</g>`);
  return parts.join("\n");
}

/** The closing panel: ensemble-mean and member-1 relative error, log scale. */
function errorPanel(table: SeriesTable, time: number[], x0: number, y0: number): string {
  const mean = column(table, "rel_err_mean");
  const member = column(table, "rel_err_member1");
  const positive = mean.concat(member).filter((v) => v > 0);
  let lo = -16;
  let hi = 0;
  if (positive.length > 0) {
    lo = Math.floor(Math.log10(Math.min(...positive)));
    hi = Math.ceil(Math.log10(Math.max(...positive)));
    if (hi === lo) hi = lo + 1;
  }
  const sx = linearScale(time[0], time[time.length - 1], x0 + MARGIN.left, x0 + PANEL_W - MARGIN.right);
  const sy = linearScale(lo, hi, y0 + PANEL_H - MARGIN.bottom, y0 + MARGIN.top);
  return [
    `<g class="panel" data-mode="relative-error">`,
    panelFrame(x0, y0, "relative error"),
    axes(sx, sy, x0, y0, true),
    `<path d="${logPath(time, mean, sx, sy)}" fill="none" stroke="${ERR_MEAN}" stroke-width="1.4"/>`,
    `<path d="${logPath(time, member, sx, sy)}" fill="none" stroke="${ERR_MEMBER}" stroke-width="1.4"/>`,
    `<text x="${x0 + PANEL_W - MARGIN.right}" y="${y0 + MARGIN.top - 8}" text-anchor="end" ` +
      `font-size="10"><tspan fill="${ERR_MEAN}">mean</tspan> / <tspan fill="${ERR_MEMBER}">member 1</tspan></text>`,
    `</g>`,
  ].join("\n");
}

/** Assemble the whole SVG. Pure function of the parsed table and options. */
export function buildFigure(
  table: SeriesTable,
  modes: string[],
  members: number,
  title: string,
): string {
  if (table.rows.length === 0) {
    throw new Error("series CSV has no data rows");
  }
  const available = modeTags(table);
  if (modes.length === 0) {
    modes = available;
  }
  // every requested mode must exist before any drawing happens
  for (const tag of modes) {
    if (!available.includes(tag)) {
      throw new Error(`mode ${tag} is not tracked in this CSV (found: ${available.join(", ") || "none"})`);
    }
    const have = memberCount(table, tag);
    if (members > have) {
      throw new Error(`CSV carries ${have} member overlays for mode ${tag}, ${members} requested`);
    }
  }
  const time = column(table, "time");
  const nPanels = modes.length + 1;
  const cols = 2;
  const rows = Math.ceil(nPanels / cols);
  const width = cols * PANEL_W + GAP;
  const height = HEADER + rows * (PANEL_H + GAP);

  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    `<text x="${GAP / 2}" y="22" font-size="14" font-weight="bold">${title}</text>`,
  ];
  for (let i = 0; i < modes.length; i++) {
    const x0 = (i % cols) * PANEL_W + GAP / 2;
    const y0 = HEADER + Math.floor(i / cols) * (PANEL_H + GAP);
    parts.push(modePanel(table, modes[i], members, time, x0, y0));
  }
  const x0 = (modes.length % cols) * PANEL_W + GAP / 2;
  const y0 = HEADER + Math.floor(modes.length / cols) * (PANEL_H + GAP);
  parts.push(errorPanel(table, time, x0, y0));
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

/** Read the named CSV and write the rendered figure. */
export function renderFilterFigure(spec: FigureSpec): void {
  const table = parseSeries(readFileSync(spec.csvPath, "utf8"));
  const title =
    spec.title ??
    `${table.meta.get("model") ?? "run"} / ${table.meta.get("filter") ?? ""} filter`;
  const svg = buildFigure(table, spec.modes, spec.members, title);
  writeFileSync(spec.outPath, svg);
}
