"""Command-line entry point.

Exit status: 0 on success, 2 on usage errors (bad flags, unparsable
predicate), 1 on runtime errors such as a register wider than the
configured maximum.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import IO, Iterator, Sequence

from . import harness
from .errors import PredicateSyntaxError, PredicateTypeError, QsubError
from .interference import InterferenceMode, singleton_witnesses, unitarity_witness
from .predicate import SolutionSet, enumerate_solutions, parse
from .statevec import check_width, trial_stream

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

SOLVE_DOMAIN = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {value}")
    return value


def _pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if a < 0 or b < 0:
        raise argparse.ArgumentTypeError("pair members must be non-negative")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsub", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, predicate=True, trials=True):
        if predicate:
            p.add_argument("--predicate", required=True, help='condition on x, e.g. "x*x - 4 = 0"')
        p.add_argument("--bits", required=True, type=_positive_int, help="width k of the X register")
        if trials:
            p.add_argument("--trials", type=_positive_int, default=10000)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of standard output")

    run = sub.add_parser("run", help="run the measure-then-interfere algorithm")
    common(run)
    run.add_argument("--mode", choices=[m.value for m in InterferenceMode], default="ideal")

    compare = sub.add_parser("compare", help="algorithm in both modes vs classical and Grover baselines")
    common(compare)

    certify = sub.add_parser("certify", help="check pairs of solution sets for a fixed-unitary obstruction")
    common(certify, predicate=False, trials=False)
    certify.add_argument("--pair", type=_pair, help="two x values a,b: compare solution sets {a} and {b}")

    solve = sub.add_parser("solve-classical", help="probe x values in random order until a solution")
    common(solve, trials=False)
    return parser


@contextlib.contextmanager
def _sink(path: str | None) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _run(args, out: IO[str]):
    ast = parse(args.predicate)
    report = harness.run_paper_algorithm(
        ast, args.bits, InterferenceMode(args.mode), args.trials, args.seed, text=args.predicate
    )
    harness.emit_report(report, args.format, out)


def _compare(args, out: IO[str]):
    ast = parse(args.predicate)
    report = harness.run_comparison(ast, args.bits, args.trials, args.seed, text=args.predicate)
    harness.emit_comparison(report, args.format, out)


def _certify(args, out: IO[str]):
    k = check_width(args.bits)
    if args.pair is not None:
        a, b = args.pair
        reports = [unitarity_witness(k, SolutionSet(k, (a,)), SolutionSet(k, (b,)))]
    else:
        reports = list(singleton_witnesses(k))
    harness.emit_witnesses(k, reports, args.format, out)


def _solve_classical(args, out: IO[str]):
    ast = parse(args.predicate)
    k = check_width(args.bits)
    rng = trial_stream(args.seed, 0, SOLVE_DOMAIN)
    checks, solution = harness.classical_search(ast, k, rng)
    n = enumerate_solutions(ast, k).n
    result = {
        "schema_version": harness.SCHEMA_VERSION,
        "predicate": args.predicate,
        "k": k,
        "seed": args.seed,
        "checks": checks,
        "solution": solution,
        "n": n,
        "classical_expected_checks": harness.classical_expected_checks(n, k) if n else None,
    }
    if args.format == "json":
        text = harness.to_json(result)
    else:
        text = harness.csv_table(list(result), [[harness.csv_cell(v) for v in result.values()]])
    harness.write_text(out, text)


_COMMANDS = {
    "run": _run,
    "compare": _compare,
    "certify": _certify,
    "solve-classical": _solve_classical,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        # parse up front so that a bad predicate is a usage error even with --out
        if getattr(args, "predicate", None) is not None:
            parse(args.predicate)
        if getattr(args, "pair", None) is not None and max(args.pair) >= 1 << args.bits:
            raise UsageError(f"qsub certify: error: --pair values must be below 2**{args.bits}")
        with _sink(args.out) as out:
            _COMMANDS[args.command](args, out)
    except (PredicateSyntaxError, PredicateTypeError) as exc:
        print(f"qsub {args.command}: error: invalid predicate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (QsubError, OSError) as exc:
        print(f"qsub {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry():
    sys.exit(main())
