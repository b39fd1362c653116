"""Command-line entry point: validate, enumerate, simulate, randomize, report."""

from __future__ import annotations

import argparse
import logging
import sys

from . import report
from .exact.classes import DEFAULT_CAP, InstanceTooLarge, attach_volumes, enumerate_classes, strategy_space
from .preferences import check_preferences
from .scenario import ScenarioError, parse_number, parse_scenario, randomize_scenario, serialize_scenario
from .sim import ASYNC, DEFAULT_ROUNDS, SYNC, SimConfig, default_workers, partition_report, run_all

EXIT_OK = 0
EXIT_AXIOMS = 1
EXIT_USAGE = 2          # argparse's own code for bad flags
EXIT_IO = 3
EXIT_SCENARIO = 4
EXIT_CAP = 5
EXIT_DOCUMENT = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def _scenario(path: str, strict: bool = False):
    try:
        s = parse_scenario(_read(path), strict=strict)
    except ScenarioError as exc:
        raise CliError(f"{path}: {exc}", EXIT_SCENARIO) from None
    for w in s.warnings:
        print(f"warning: {path}: {w}", file=sys.stderr)
    return s


def _emit(doc: dict, fmt: str, path: str | None) -> None:
    _write(report.to_csv(doc) if fmt == "csv" else report.to_json(doc), path)


def cmd_validate(args) -> int:
    s = _scenario(args.scenario, strict=args.strict)
    bad = check_preferences(s.graph, s.preferences())
    if not bad:
        print(f"{args.scenario}: ok ({s.n} countries, {s.graph.m} relations)")
        return EXIT_OK
    for i, violations in sorted(bad.items()):
        for v in violations[:args.max_violations]:
            lo, hi = ("".join(map(str, x)) for x in (v.lower, v.upper))
            print(f"country {i + 1}: {v.axiom} axiom violated: {hi} vs {lo}")
        if len(violations) > args.max_violations:
            print(f"country {i + 1}: ... {len(violations) - args.max_violations} more")
    return EXIT_AXIOMS


def cmd_enumerate(args) -> int:
    s = _scenario(args.scenario)
    try:
        classes = enumerate_classes(s.graph, s.preferences(), cap=args.cap, workers=args.workers)
    except InstanceTooLarge as exc:
        raise CliError(str(exc), EXIT_CAP) from None
    space = strategy_space(s.graph)
    if args.volume_samples:
        attach_volumes(classes, space, args.volume_samples, args.seed)
    doc = report.enumeration_document(s, space, classes, args.cap,
                                      args.volume_samples or None,
                                      args.seed if args.volume_samples else None)
    _emit(doc, args.format, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = _scenario(args.scenario)
    opts = dict(s.sim)
    for key in ("q", "rounds", "mode", "seed"):
        value = getattr(args, key)
        if value is not None:
            opts[key] = value
    try:
        config = SimConfig(q=opts.get("q", 1000), rounds=opts.get("rounds", DEFAULT_ROUNDS),
                           mode=opts.get("mode", ASYNC), seed=opts.get("seed", 0),
                           workers=args.workers)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    results = run_all(s.graph, s.preferences(), config)
    doc = report.simulation_document(s, config, partition_report(results))
    _emit(doc, args.format, args.output)
    return EXIT_OK


def cmd_randomize(args) -> int:
    try:
        power = [parse_number(t) for t in _read(args.power).replace(",", " ").split()]
        s = randomize_scenario(args.n, power, args.seed)
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_SCENARIO) from None
    _write(serialize_scenario(s), args.output)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        doc = report.load_document(_read(args.document))
    except ValueError as exc:
        raise CliError(f"{args.document}: {exc}", EXIT_DOCUMENT) from None
    _emit(doc, args.format, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="powergame", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def output(sp, formats=True):
        sp.add_argument("-o", "--output", help="write here instead of stdout")
        if formats:
            sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("validate", help="parse a scenario and check the preference axioms")
    sp.add_argument("scenario")
    sp.add_argument("--strict", action="store_true", help="reject null rows with nonzero importance")
    sp.add_argument("--max-violations", type=int, default=5)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("enumerate", help="exact equilibrium classes")
    sp.add_argument("scenario")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest country count to accept")
    sp.add_argument("--volume-samples", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=default_workers())
    output(sp)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("simulate", help="best-response update processes from sampled matrices")
    sp.add_argument("scenario")
    sp.add_argument("--q", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--mode", choices=(ASYNC, SYNC))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, default=default_workers())
    output(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("randomize", help="random relations and importances")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--power", required=True, help="file with the power values")
    sp.add_argument("--seed", type=int, required=True)
    output(sp, formats=False)
    sp.set_defaults(func=cmd_randomize)

    sp = sub.add_parser("report", help="reformat a saved report document")
    sp.add_argument("document")
    output(sp)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
