"""Command line interface.

Exit codes: 0 success, 1 bad input, 2 numerical failure.  Structured output
goes to stdout (or ``-o``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import __version__
from .dominance import dominance_check
from .exceptions import NumericError
from .indices import evaluate, inequality_report, sweep
from .persist import Binning, dumps_society, emit_report, ingest_microdata, load_society, read_microdata_csv
from .utility import PowerUtility, parse_utility
from .welfare import optimal_weights

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def parse_theta(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        theta = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be a number or 'inf', got {text!r}") from None
    if math.isnan(theta) or theta < 0:
        raise argparse.ArgumentTypeError(f"theta must be >= 0, got {text!r}")
    return theta


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return n


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="oppwelfare", description="Opportunity-sensitive welfare and inequality indices."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, theta=True, fmt="json"):
        p.add_argument("--utility", default="log", help="'log' (default) or 'power:<sigma>'")
        if theta:
            p.add_argument("--theta", type=parse_theta, default=0.0, help="aversion level, or 'inf'")
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("-o", "--output", help="write to this file instead of stdout")

    p = sub.add_parser("evaluate", help="welfare, EDEI, weights and efficiency/opportunity split")
    p.add_argument("society")
    common(p)
    p = sub.add_parser("indices", help="overall, social-risk and opportunity indices")
    p.add_argument("society")
    common(p)
    p = sub.add_parser("sweep", help="all indices over an evenly spaced rho grid")
    p.add_argument("society")
    p.add_argument("--grid", type=_positive_int, default=101)
    common(p, theta=False, fmt="csv")
    p = sub.add_parser("weights", help="normative type weights")
    p.add_argument("society")
    common(p)
    p = sub.add_parser("compare", help="opportunity dominance between two societies")
    p.add_argument("society_a")
    p.add_argument("society_b")
    p.add_argument("--grid", type=_positive_int, default=101)
    common(p, theta=False)
    p = sub.add_parser("ingest", help="build a society file from type,income[,weight] CSV")
    p.add_argument("csv")
    p.add_argument("--binning", default="exact", help="'exact' (default) or 'quantile:<k>'")
    p.add_argument("--name")
    p.add_argument("-o", "--output")
    return parser


def _write(data: bytes, path: str | None) -> None:
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _run(args) -> None:
    if args.command == "ingest":
        society = ingest_microdata(read_microdata_csv(args.csv), Binning.parse(args.binning), name=args.name)
        _write(dumps_society(society).encode("utf-8"), args.output)
        return

    u = parse_utility(args.utility)
    theta = getattr(args, "theta", None)
    if isinstance(u, PowerUtility) and (theta is None or theta > 0):
        print(
            "note: power utility with positive aversion is computed, but scale invariance "
            "only holds for log utility",
            file=sys.stderr,
        )

    if args.command == "compare":
        a, b = load_society(args.society_a), load_society(args.society_b)
        report = dominance_check(a, b, u, grid_size=args.grid, ca_family=True)
    else:
        society = load_society(args.society)
        if args.command == "evaluate":
            report = evaluate(society, u, theta)
        elif args.command == "indices":
            report = inequality_report(society, u, theta)
        elif args.command == "weights":
            report = optimal_weights(society, u, theta)
        else:
            report = sweep(society, u, args.grid)
    _write(emit_report(report, args.format), args.output)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _run(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
