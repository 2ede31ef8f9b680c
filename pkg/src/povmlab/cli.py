"""Command-line front end.

    povmlab run <file> [--out report.json] [--csv summary.csv]
                       [--workers N] [--tol X] [--seed S]
    povmlab gen <kind> --dim D --seed S
    povmlab version

Exit codes: 0 when no scenario FAILs, 1 on any FAIL, 2 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Any

from . import __version__
from .generators import KINDS, generate_instance
from .reporting import CheckReport
from .scenarios import parse_scenarios, run_scenarios
from .serialization import SchemaError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2

WORKERS_ENV = "POVMLAB_WORKERS"


def emit_report(reports: list[CheckReport], fmt: str, path: str) -> None:
    """Write reports: json keeps the full structure (witness matrices
    included), csv is one summary row per scenario."""
    if fmt == "json":
        payload = {"reports": [r.to_dict() for r in reports]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["name", "verdict", "max_residual", "tol", "wall_time"]
            )
            writer.writeheader()
            for r in reports:
                writer.writerow(r.summary_row())
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        with open(args.file) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        print(f"error: no such file: {args.file}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON in {args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        scenarios = parse_scenarios(data)
        if args.tol is not None:
            for sc in scenarios:
                sc.tol = args.tol
        if args.seed is not None:
            for sc in scenarios:
                sc.seed = args.seed
        reports = run_scenarios(scenarios, workers=args.workers)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    for r in reports:
        print(f"{r.verdict:4s} {r.name} (max residual {r.max_residual:.3e}, "
              f"{r.wall_time:.3f}s)")
        for note in r.notes:
            print(f"     note: {note}")
    if args.out:
        emit_report(reports, "json", args.out)
    if args.csv:
        emit_report(reports, "csv", args.csv)
    return EXIT_FAIL if any(r.verdict == "FAIL" for r in reports) else EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    try:
        payload: dict[str, Any] = generate_instance(args.kind, args.dim, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="povmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("file", help="scenario JSON file")
    run_p.add_argument("--out", help="write full JSON report here")
    run_p.add_argument("--csv", help="write CSV summary here")
    run_p.add_argument("--workers", type=int, default=_default_workers(),
                       help=f"parallel scenario workers (default ${WORKERS_ENV} or 1)")
    run_p.add_argument("--tol", type=float, default=None,
                       help="override every scenario tolerance")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override every scenario seed")
    run_p.set_defaults(func=_cmd_run)

    gen_p = sub.add_parser("gen", help="generate a serialized random instance")
    gen_p.add_argument("kind", choices=KINDS)
    gen_p.add_argument("--dim", type=int, required=True)
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.set_defaults(func=_cmd_gen)

    ver_p = sub.add_parser("version", help="print the toolkit version")
    ver_p.set_defaults(func=lambda args: (print(__version__), EXIT_OK)[1])

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
