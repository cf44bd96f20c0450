"""Command-line entry points.

Every subcommand reads an optional ``--config FILE`` of ``key = value``
lines plus any number of ``--key=value`` overrides (flags win).  Exit
codes: 0 on success, 2 for configuration problems, 3 for numerical
failure (blow-up or non-finite states).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .filters import FilterDivergence
from .harness import (
    ConfigError,
    generate_truth_files,
    load_config,
    run_check,
    run_convergence,
    run_experiment,
)

_COMMANDS = {
    "truth-gen": "integrate a truth path, observe it, and store the run",
    "run-discrete": "run the windowed filter against a truth run",
    "run-continuous": "run the split-step filter alongside the truth",
    "check-disc": "Monte Carlo check of the well-posedness envelope",
    "check-varinf": "Monte Carlo check of the inflated accuracy envelope",
    "check-cts": "Monte Carlo check of the continuous-time envelope",
    "converge-limit": "coupled discrete-to-continuous convergence table",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enkflab",
        description="ensemble Kalman filtering experiments and bound checks",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in _COMMANDS.items():
        # abbreviation matching must stay off or --h=... is taken for --help
        p = sub.add_parser(name, help=text, allow_abbrev=False)
        p.add_argument("--config", default=None, help="key = value config file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args, extra = _build_parser().parse_known_args(argv)
    try:
        cfg = load_config(args.config, extra)
        if args.command == "truth-gen":
            paths = generate_truth_files(cfg)
            print(f"truth written to {paths['truth']}")
        elif args.command in ("run-discrete", "run-continuous"):
            kind = args.command.removeprefix("run-")
            cfg = dataclasses.replace(cfg, filter=kind)
            paths = run_experiment(cfg)
            rel = paths["run"].series.column("rel_err_mean")
            print(f"series written to {paths['series']}")
            print(f"final relative error {rel[-1]:.6g}, "
                  f"tail mean {rel[rel.size // 2:].mean():.6g}")
        elif args.command in ("check-disc", "check-varinf", "check-cts"):
            out = run_check(cfg, args.command.removeprefix("check-"))
            report = out["report"]
            print(report.describe())
            for mult, ok in report.sweep:
                verdict = "void" if ok is None else ("pass" if ok else "fail")
                print(f"  beta x {mult:g}: {verdict}")
            for key in sorted(report.notes):
                print(f"  {key} = {report.notes[key]:.6g}")
            print(f"report written to {out['report_csv']}")
        else:
            out = run_convergence(cfg)
            print("h, mean square gap, stderr")
            for h, gap, se in out["table"]:
                print(f"  {h:g}, {gap:.6g}, {se:.3g}")
            gaps = [g for _, g, _ in out["table"]]
            trend = "decreasing" if all(b < a for a, b in zip(gaps[:-1], gaps[1:])) \
                else "NOT decreasing"
            print(f"gap sequence is {trend}; table written to {out['csv']}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FilterDivergence as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
