#!/usr/bin/env python3
"""
Command-line entry point: python -m deflab <command> [options].

Machine output goes to stdout, logs and summaries to stderr. Exit codes:
0 success, 1 a verification found a violation, 2 usage or input error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

# Fix for relative imports when running as a script
if __name__ == "__main__":
    parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    if parent_dir not in sys.path:
        sys.path.insert(0, parent_dir)
    if __package__ is None:
        __package__ = "deflab"

from deflab import commands
from deflab.settings import DeflabException, apply_threads, configure_logging

logger = logging.getLogger(__name__)

# (name, command class, help)
COMMAND_CONFIGS = [
    ("classify", "ClassifyCommand", "list the deficient subsets of a table file"),
    ("theory", "TheoryCommand", "closed-form rates, limits and counts"),
    ("exact", "ExactCommand", "exhaustive census over all tables of a small order"),
    ("mc", "McCommand", "Monte Carlo estimate for one order"),
    ("sweep", "SweepCommand", "Monte Carlo estimates over several orders with theory columns"),
    ("diagrams", "DiagramsCommand", "count or list configuration diagrams"),
    ("verify-lemma3", "VerifyLemma3Command", "check the parameter relations on all small diagrams"),
    ("witness", "WitnessCommand", "smallest table carrying a diagram"),
    ("histogram", "HistogramCommand", "distribution of the number of typed deficient pairs"),
    ("independence", "IndependenceCommand", "correlations between the type indicators"),
]

THEORY_KINDS = ('pair2', 'per-type', 'dary', 'exceedance', 'partial-sum',
                'expected-count', 'class-counts', 'vanishing-bound')


def u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer: {text!r}")
    return value


def positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def order_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive orders: {text!r}")
    return values


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=u64, default=0, help="64-bit seed (default 0)")
    common.add_argument("--samples", type=positive, default=None, help="number of random tables")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    common.add_argument("--threads", type=positive, default=None,
                        help="worker threads (default: DEFLAB_THREADS, else all cores)")
    common.add_argument("--force", action="store_true", help="allow exhaustive runs past the table guard")
    return common


def _query_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=positive, default=None, help="order of the tables")
    parser.add_argument("--d", type=int, default=2, help="arity (default 2)")
    parser.add_argument("--s", type=int, default=2, help="subset size (default 2)")
    parser.add_argument("--eps", type=int, default=0, help="largest allowed exceedance (default 0)")
    parser.add_argument("--type", default=None, help="only pairs of this type, T0..T7")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="deflab", description="Deficient subsets of random operation tables.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    sub = {name: subparsers.add_parser(name, parents=[common], help=text) for name, _, text in COMMAND_CONFIGS}

    sub["classify"].add_argument("table", help="table file: header 'n' or 'n d', then rows")
    sub["classify"].add_argument("--s", type=int, default=2, help="subset size (default 2)")
    sub["classify"].add_argument("--eps", type=int, default=0, help="largest allowed exceedance (default 0)")

    theory = sub["theory"]
    theory.add_argument("kind", choices=THEORY_KINDS)
    theory.add_argument("--n", type=positive, default=None)
    theory.add_argument("--d", type=int, default=2)
    theory.add_argument("--s", type=int, default=None)
    theory.add_argument("--eps", type=int, default=None)
    theory.add_argument("--K", type=positive, default=40, help="terms of the partial sum (default 40)")
    theory.add_argument("--k", type=positive, default=1, help="configuration size for class-counts")
    theory.add_argument("--rate", default="7/2", help="rate for partial-sum, e.g. 7/2")

    for name in ("exact", "mc", "sweep"):
        _query_options(sub[name])
    sub["mc"].add_argument("--mean", action="store_true", help="estimate the mean count instead")
    sub["sweep"].add_argument("--n-list", type=order_list, required=True, help="comma-separated orders")

    sub["diagrams"].add_argument("--k", type=positive, required=True, help="number of edges")
    mode = sub["diagrams"].add_mutually_exclusive_group()
    mode.add_argument("--count", action="store_true", help="print the count (default)")
    mode.add_argument("--list", action="store_true", help="print every diagram")
    sub["diagrams"].add_argument("--realizable-only", action="store_true")

    sub["verify-lemma3"].add_argument("--k-max", type=positive, default=3)

    sub["witness"].add_argument("--diagram", required=True, help='JSON like {"v":2,"edges":[[1,2,"T7"]]}, or @file')

    for name in ("histogram", "independence"):
        sub[name].add_argument("--n", type=positive, default=None, help="order of the tables")
    for name in ("classify", "histogram"):
        sub[name].add_argument("--include-t0", action="store_true", help="count constant (T0) pairs as well")
    return parser


def _fill_theory_defaults(args) -> None:
    if args.command != "theory":
        return
    if args.s is None:
        args.s = 3 if args.kind in ("exceedance", "vanishing-bound") else 2
    if args.eps is None:
        args.eps = 2 if args.kind == "vanishing-bound" else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else commands.EXIT_USAGE
    _fill_theory_defaults(args)
    configure_logging()

    class_name = next(cls for name, cls, _ in COMMAND_CONFIGS if name == args.command)
    command = getattr(commands, class_name)(args)
    try:
        if command.uses_kernels:
            threads = apply_threads(args.threads)
            logger.debug(f"running {args.command} on {threads} threads")
        return command.run()
    except (DeflabException, OSError, UnicodeDecodeError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return commands.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
