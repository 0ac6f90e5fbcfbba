"""Command line entry point: ``fsis run SCENARIO`` and ``fsis scenarios``."""

from __future__ import annotations

import argparse
import sys

from .report import EXIT_ERROR, TaskError, run
from .scenario import ScenarioError, bundled_scenarios, load_scenario


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsis",
        description="Injectivity, stability and closedness checks for unions of "
                    "shift-invariant spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run every task of a scenario and print the summary")
    r.add_argument("scenario", help="scenario JSON file or bundled scenario name")
    r.add_argument("--out", metavar="DIR", help="write summary, CSV tables and manifest here")
    r.add_argument("--grid", type=_positive_int, metavar="M", help="grid nodes per axis")
    r.add_argument("--rank-tol", type=_positive_float)
    r.add_argument("--spec-tol", type=_positive_float)
    r.add_argument("--conv-eps", type=_positive_float)
    r.add_argument("--max-iter", type=_positive_int,
                   help="cap on squaring steps of the intersection iteration")
    r.add_argument("--close-eps", type=_positive_float)

    sub.add_parser("scenarios", help="list bundled scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "scenarios":
        for name in bundled_scenarios():
            print(name.removesuffix(".json"))
        return 0
    try:
        sc = load_scenario(args.scenario)
        bundle = run(sc, args.out, grid_M=args.grid, rank_tol=args.rank_tol,
                     spec_tol=args.spec_tol, conv_eps=args.conv_eps,
                     max_iter=args.max_iter, close_eps=args.close_eps)
    except (ScenarioError, FileNotFoundError, TaskError, ValueError) as exc:
        print(f"fsis: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(bundle.summary)
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
