"""Command-line entry point ``mmsalloc``.

Exit codes: 0 success, 1 guarantee not met, 2 invalid input or allocation,
3 instance too large for an exact computation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .bench import run_bench, to_csv
from .errors import CapacityError, InputError, MmsError, StructuralError
from .extremal import best_ratio, build_submodular_counterexample, build_xos_counterexample
from .generate import KINDS, generate
from .instance import Allocation, Instance
from .mms import mms_additive_lb, mms_exact
from .solvers import SOLVERS, get_solver
from .valuations import Additive
from .values import format_value, parse_value
from .verify import verify
from .xos import mms_partition_xos

EXIT_OK, EXIT_GUARANTEE, EXIT_STRUCTURAL, EXIT_CAPACITY = 0, 1, 2, 3

FAMILIES = {
    "submodular": (build_submodular_counterexample, Fraction(3, 4)),
    "xos": (build_xos_counterexample, Fraction(1, 2)),
}


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(text: str, path: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def cmd_solve(args) -> int:
    instance = Instance.loads(_read(args.input))
    solver = get_solver(args.alg)
    allocation = solver.run(instance)
    _write(allocation.dumps(), args.output)
    if not args.verify:
        return EXIT_OK
    alpha = solver.alpha if args.alpha is None else args.alpha
    report = verify(instance, allocation, alpha)
    sys.stderr.write(_dump(report.to_json()))
    return EXIT_OK if report.passed else EXIT_GUARANTEE


def cmd_mms(args) -> int:
    instance = Instance.loads(_read(args.input))
    if not 0 <= args.agent < instance.n:
        raise InputError(f"agent {args.agent} out of range for n={instance.n}")
    valuation = instance.valuations[args.agent]
    parts = instance.n if args.parts is None else args.parts
    if args.xos_partition:
        bundles = mms_partition_xos(valuation, parts)
        result = {"parts": [list(b) for b in bundles], "values": [format_value(valuation.value(b)) for b in bundles]}
    elif args.lb is not None:
        if not isinstance(valuation, Additive):
            raise InputError("--lb needs an additive agent")
        found = mms_additive_lb(valuation.values, parts, args.lb)
        result = {"value": format_value(found.value), "witness": [list(b) for b in found.witness]}
    else:
        found = mms_exact(valuation, parts)
        result = {"value": format_value(found.value), "witness": [list(b) for b in found.witness]}
    _write(_dump(result), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = Instance.loads(_read(args.input))
    try:
        allocation = Allocation.from_json(json.loads(_read(args.allocation)))
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid allocation JSON: {exc}") from exc
    mms = None if args.mms is None else [parse_value(x) for x in args.mms.split(",")]
    report = verify(instance, allocation, args.alpha, mms)
    _write(_dump(report.to_json()), args.output)
    return EXIT_OK if report.passed else EXIT_GUARANTEE


def cmd_gen(args) -> int:
    _write(generate(args.kind, args.n, args.m, args.seed).dumps(), args.output)
    return EXIT_OK


def cmd_extremal(args) -> int:
    build, bound = FAMILIES[args.family]
    instance = build(args.n)
    if not args.check:
        _write(instance.dumps(), args.output)
        return EXIT_OK
    report = best_ratio(instance)
    result = {
        "family": args.family,
        "n": args.n,
        "mms": [format_value(x) for x in report.mms],
        "best_min_ratio": format_value(report.best_min_ratio),
        "expected": format_value(bound),
        "witness": [list(b) for b in report.witness.bundles],
    }
    _write(_dump(result), args.output)
    return EXIT_OK if report.best_min_ratio == bound else EXIT_GUARANTEE


def cmd_bench(args) -> int:
    try:
        config = json.loads(_read(args.config))
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid bench config: {exc}") from exc
    if args.seed is not None:
        for exp in config.get("experiments", []):
            exp["seed"] = args.seed
    rows = run_bench(config, jobs=args.jobs)
    _write(to_csv(rows), args.output)
    return EXIT_OK if all(r["status"] == "pass" for r in rows) else EXIT_GUARANTEE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsalloc", description="Approximate maximin-share allocation of indivisible goods.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an allocation")
    p.add_argument("--alg", required=True, choices=sorted(SOLVERS))
    p.add_argument("--input", required=True, help="instance JSON ('-' for stdin)")
    p.add_argument("--output", help="allocation JSON (default stdout)")
    p.add_argument("--verify", action="store_true", help="check the result and report on stderr")
    p.add_argument("--alpha", type=parse_value, help="target for --verify (default: the solver's guarantee)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("mms", help="maximin share of one agent")
    p.add_argument("--input", required=True)
    p.add_argument("--agent", type=int, default=0)
    p.add_argument("--parts", type=int, help="number of parts (default n)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact value (default)")
    mode.add_argument("--lb", type=parse_value, metavar="EPS", help="lower bound within a factor 1 - EPS (additive)")
    mode.add_argument("--xos-partition", action="store_true", help="parts worth an eighth of the share (XOS)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("verify", help="check an allocation against alpha times every share")
    p.add_argument("--input", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--alpha", type=parse_value, default=Fraction(1))
    p.add_argument("--mms", help="comma-separated shares to use instead of exact computation")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("extremal", help="instances with no good allocation")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--check", action="store_true", help="compute the best achievable ratio exhaustively")
    p.add_argument("--output")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("bench", help="run a benchmark sweep and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override every experiment's starting seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except CapacityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CAPACITY
    except (StructuralError, InputError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_STRUCTURAL
    except MmsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_GUARANTEE


if __name__ == "__main__":
    sys.exit(main())
