"""Command line entry point: ``royale run | catalog | verify | list``."""

from __future__ import annotations

import argparse
import logging
import sys

from .core import Algorithm, ConfigurationError
from .harness import build_spec, emit_catalog, read_spec_file, run_experiment, verify_results
from .problems import catalog


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="royale", description="Battle Royale Optimizer benchmark harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment batch")
    run.add_argument("--spec", help="flat key = value experiment file")
    run.add_argument("--algo", action="append", help="BRO, MBRO, PSO, RANDOM (repeat or comma-separate)")
    run.add_argument("--fn", action="append", help="f1..f19, ranges like f1-f7, or 'all'")
    run.add_argument("--runs", type=int)
    run.add_argument("--iters", type=int, dest="max_iter")
    run.add_argument("--pop", type=int, dest="pop_size")
    run.add_argument("--threshold", type=int, dest="damage_threshold")
    run.add_argument("--dim", type=int, dest="dimension_override", help="dimension for f1-f13")
    run.add_argument("--seed", type=int, dest="master_seed")
    run.add_argument("--out", dest="output_path")
    run.add_argument("--traces", action="store_const", const=True, dest="emit_traces")
    run.add_argument("--shifts", choices=["catalog", "none", "printed"], dest="shift_mode")
    run.add_argument("--jobs", type=int, help="worker processes")

    cat = sub.add_parser("catalog", help="write the benchmark catalog as CSV")
    cat.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="recompute aggregates from per-run rows")
    ver.add_argument("--results", required=True)

    sub.add_parser("list", help="list algorithms and benchmark functions")
    return parser


def _cmd_run(args) -> int:
    file_values = read_spec_file(args.spec) if args.spec else {}
    spec = build_spec(
        file_values,
        algorithms=args.algo,
        functions=args.fn,
        runs=args.runs,
        max_iter=args.max_iter,
        pop_size=args.pop_size,
        damage_threshold=args.damage_threshold,
        dimension_override=args.dimension_override,
        master_seed=args.master_seed,
        output_path=args.output_path,
        emit_traces=args.emit_traces,
        shift_mode=args.shift_mode,
        jobs=args.jobs,
    )
    report = run_experiment(spec)
    print(report.table())
    print(f"results written to {report.output_dir}")
    return 0


def _cmd_catalog(args) -> int:
    path = emit_catalog(args.out)
    print(f"catalog written to {path}")
    return 0


def _cmd_verify(args) -> int:
    problems = verify_results(args.results)
    for p in problems:
        print(p)
    if problems:
        print(f"error: {len(problems)} discrepancies in {args.results}", file=sys.stderr)
        return 1
    print(f"{args.results}: aggregates consistent with per-run rows")
    return 0


def _cmd_list(args) -> int:
    print("algorithms: " + ", ".join(a.value for a in Algorithm))
    for p in catalog():
        print(f"{p.id:<4} {p.name:<26} dim={p.dimension:<3} range=[{p.lower:g}, {p.upper:g}]")
    return 0


COMMANDS = {"run": _cmd_run, "catalog": _cmd_catalog, "verify": _cmd_verify, "list": _cmd_list}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
