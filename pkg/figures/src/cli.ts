import { pathToFileURL } from "url";

import yargs from "yargs";

import { renderFilterFigure } from "./figure.js";

export function run(args: string[]): number {
  try {
    const argv = yargs(args)
      .usage("Rebuild a multi-panel filter figure from an enkflab series CSV")
      .option("csv", { type: "string", demandOption: true, describe: "input series CSV" })
      .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
      .option("modes", {
        type: "string",
        default: "",
        describe: "comma-separated mode tags m1_m2 (default: every tracked mode)",
      })
      .option("members", { type: "number", default: 2, describe: "member overlays per panel" })
      .option("title", { type: "string", describe: "figure title" })
      .strict()
      .exitProcess(false)
      .parseSync();

    if (!Number.isInteger(argv.members) || argv.members < 0) {
      console.error("--members must be a non-negative integer");
      return 2;
    }
    renderFilterFigure({
      csvPath: argv.csv,
      outPath: argv.out,
      modes: argv.modes === "" ? [] : argv.modes.split(",").map((s) => s.trim()),
      members: argv.members,
      title: argv.title,
    });
    console.log(`figure written to ${argv.out}`);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 2;
  }
  return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(run(process.argv.slice(2)));
}
