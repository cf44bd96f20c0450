import { readFileSync } from "fs";
import { fileURLToPath } from "url";

import { describe, expect, it } from "vitest";

import { buildFigure, linearTicks } from "../src/figure.js";
import { parseSeries } from "../src/series.js";

const FIXTURE = fileURLToPath(
  new URL("./fixtures/small_disc.csv", import.meta.url),
);

const fixtureTable = () => parseSeries(readFileSync(FIXTURE, "utf8"));

/** Series CSV where every tracked quantity is constant in time. */
function constantCsv(n = 8): string {
  const header =
    "step,time,rel_err_mean,rel_err_member1,u1_0_re,u1_0_im,v1_1_0_re,v1_1_0_im";
  const rows: string[] = [];
  for (let i = 0; i < n; i++) {
    rows.push(`${i},${i * 0.5},0.25,0.5,1.5,-0.75,1.25,-0.5`);
  }
  return `# model = linear\n${header}\n${rows.join("\n")}\n`;
}

function pathYs(d: string): number[] {
  const ys: number[] = [];
  for (const seg of d.match(/[ML][-\d.]+,[-\d.]+/g) ?? []) {
    ys.push(Number(seg.slice(1).split(",")[1]));
  }
  return ys;
}

function dataPaths(svg: string, stroke: string): string[] {
  const re = new RegExp(`<path d="([^"]*)" fill="none" stroke="${stroke}"`, "g");
  const out: string[] = [];
  let m: RegExpExecArray | null;
  while ((m = re.exec(svg)) !== null) out.push(m[1]);
  return out;
}

describe("buildFigure", () => {
  it("draws a constant series as horizontal lines", () => {
    const svg = buildFigure(parseSeries(constantCsv()), [], 1, "flat");
    // truth, member, and both error curves all stay at one pixel height
    for (const stroke of ["#000000", "#4878a8", "#c0392b", "#2a6ea6"]) {
      const paths = dataPaths(svg, stroke);
      expect(paths.length).toBeGreaterThan(0);
      for (const d of paths) {
        const ys = pathYs(d);
        expect(ys).toHaveLength(8);
        expect(new Set(ys).size).toBe(1);
      }
    }
  });

  it("is byte-deterministic", () => {
    const table = fixtureTable();
    const a = buildFigure(table, [], 2, "run");
    const b = buildFigure(table, [], 2, "run");
    expect(a).toBe(b);
  });

  it("panels every tracked mode plus the error panel by default", () => {
    const svg = buildFigure(fixtureTable(), [], 2, "run");
    expect(svg.match(/class="panel"/g)).toHaveLength(4);
    for (const tag of ["0_0", "1_0", "2_0", "relative-error"]) {
      expect(svg).toContain(`data-mode="${tag}"`);
    }
  });

  it("restricts panels to the requested modes", () => {
    const svg = buildFigure(fixtureTable(), ["1_0"], 2, "run");
    expect(svg.match(/class="panel"/g)).toHaveLength(2);
    expect(svg).toContain(`data-mode="1_0"`);
    expect(svg).not.toContain(`data-mode="0_0"`);
  });

  it("overlays the requested number of members", () => {
    const one = buildFigure(fixtureTable(), ["1_0"], 1, "run");
    const two = buildFigure(fixtureTable(), ["1_0"], 2, "run");
    expect(dataPaths(one, "#4878a8")).toHaveLength(1);
    expect(dataPaths(two, "#4878a8")).toHaveLength(2);
  });

  it("rejects a mode the CSV does not track, before rendering", () => {
    expect(() => buildFigure(fixtureTable(), ["9_9"], 2, "run")).toThrow(
      /mode 9_9 is not tracked in this CSV \(found: 0_0, 1_0, 2_0\)/,
    );
  });

  it("rejects more member overlays than the CSV carries", () => {
    expect(() => buildFigure(fixtureTable(), [], 3, "run")).toThrow(
      /carries 2 member overlays/,
    );
  });

  it("rejects an empty series", () => {
    const table = parseSeries(
      "step,time,rel_err_mean,rel_err_member1\n",
    );
    expect(() => buildFigure(table, [], 0, "run")).toThrow(/no data rows/);
  });
});

describe("linearTicks", () => {
  it("uses 1-2-5 spacing inside the range", () => {
    expect(linearTicks(0, 10)).toEqual([0, 2, 4, 6, 8, 10]);
    expect(linearTicks(-3, 7)).toEqual([-2, 0, 2, 4, 6]);
  });

  it("collapses a degenerate range to one tick", () => {
    expect(linearTicks(2, 2)).toEqual([2]);
  });
});
