"""Command-line front end.

Subcommands: gen-mask, gen-matrix, check, closure, complete, fiber,
experiment.  Inputs come from a file path or '-' for standard input;
outputs go to --out or standard output.  JSON is single-line unless
--pretty is given.  Exit codes: 0 success, 1 for a clean negative answer
(not closable, no completion, not finite), 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import __version__
from .baselines import SolverConfig
from .closure import r_closure
from .completion import CompleteOptions, complete
from .experiment import (
    ALL_METHODS,
    PRESETS,
    ExperimentConfig,
    emit_csv,
    preset,
    run_experiment,
    to_csv_text,
)
from .fiber import fiber_dimension_test
from .graphs import necessary_conditions_report
from .linalg import DEFAULT_RANK_TOL, random_rank_r
from .masks import (
    MaskFormatError,
    parse_mask_text,
    parse_masked_matrix,
    random_mask,
    serialize_dense_matrix,
    serialize_mask_text,
)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r") as fh:
        return fh.read()


def _write_output(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _dump_json(data: dict, pretty: bool) -> str:
    if pretty:
        return json.dumps(data, indent=2) + "\n"
    return json.dumps(data) + "\n"


def _cmd_gen_mask(args) -> int:
    mask = random_mask(args.m, args.n, args.k, args.seed)
    _write_output(serialize_mask_text(mask), args.out)
    return 0


def _cmd_gen_matrix(args) -> int:
    a = random_rank_r(args.m, args.n, args.rank, args.seed)
    _write_output(serialize_dense_matrix(a), args.out)
    return 0


def _cmd_check(args) -> int:
    mask = parse_mask_text(_read_input(args.input))
    report = necessary_conditions_report(mask, args.rank, partition_budget=args.budget)
    trace = r_closure(mask, args.rank, strategy="exhaustive")
    report.r_closable = trace.closable
    fiber = fiber_dimension_test(mask, args.rank, seed=args.seed, tol=args.tol)
    report.jacobian_rank = fiber.jacobian_rank
    report.jacobian_target = fiber.target_dim
    _write_output(_dump_json(report.to_json_dict(), args.pretty), args.out)
    return 0 if report.r_closable else 1


def _cmd_closure(args) -> int:
    mask = parse_mask_text(_read_input(args.input))
    trace = r_closure(mask, args.rank, strategy=args.strategy, seed=args.seed)
    _write_output(_dump_json(trace.to_json_dict(), args.pretty), args.out)
    return 0 if trace.closable else 1


def _cmd_complete(args) -> int:
    masked = parse_masked_matrix(_read_input(args.input))
    opts = CompleteOptions(strategy=args.strategy, seed=args.seed)
    result = complete(masked, args.rank, opts)
    if result is None:
        print("no completable block", file=sys.stderr)
        return 1
    _write_output(serialize_dense_matrix(result.matrix), args.out)
    sidecar = _dump_json(result.to_json_dict(), args.pretty)
    if args.out not in (None, "-"):
        with open(args.out + ".json", "w", newline="\n") as fh:
            fh.write(sidecar)
    else:
        sys.stderr.write(sidecar)
    return 0


def _cmd_fiber(args) -> int:
    mask = parse_mask_text(_read_input(args.input))
    report = fiber_dimension_test(mask, args.rank, seed=args.seed, tol=args.tol)
    data = {
        "jacobian_rank": report.jacobian_rank,
        "jacobian_target": report.target_dim,
        "fiber_dim_estimate": report.fiber_dim_estimate,
        "generically_finite": report.generically_finite,
    }
    _write_output(_dump_json(data, args.pretty), args.out)
    return 0 if report.generically_finite else 1


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)} (have {ALL_METHODS})")
    return methods


def _cmd_experiment(args) -> int:
    if args.preset:
        overrides = {}
        if args.trials is not None:
            overrides["trials_per_count"] = args.trials
        if args.methods is not None:
            overrides["methods"] = _parse_methods(args.methods)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.threshold is not None:
            overrides["success_threshold"] = args.threshold
        config = preset(args.preset, **overrides)
    else:
        if args.m is None or args.n is None or args.rank is None or args.alphas is None:
            raise ValueError("without --preset, provide --m, --n, --rank and --alphas")
        config = ExperimentConfig(
            m=args.m,
            n=args.n,
            r=args.rank,
            measurement_counts=tuple(int(a) for a in args.alphas.split(",")),
            trials_per_count=args.trials if args.trials is not None else 100,
            methods=_parse_methods(args.methods) if args.methods else
            ("connectivity", "closure", "rank_fit", "nuclear"),
            seed=args.seed if args.seed is not None else 0,
            success_threshold=args.threshold if args.threshold is not None else 1e-4,
        )
    result = run_experiment(config, jobs=args.jobs)
    if args.out and args.out != "-":
        emit_csv(result, args.out, include_timing=args.timing)
    else:
        sys.stdout.write(to_csv_text(result, include_timing=args.timing))
    if args.json_out:
        with open(args.json_out, "w", newline="\n") as fh:
            fh.write(_dump_json(result.to_json_dict(include_timing=args.timing), args.pretty))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskcomplete",
        description="Decide unique low-rank completability from the observation "
        "mask, complete exactly by rank closure, and benchmark against "
        "optimization baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, rank=True, seed=True, tol=False, out=True, pretty=True):
        if rank:
            p.add_argument("--rank", "-r", type=int, required=True, help="target rank")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if tol:
            p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL,
                           help="relative numerical-rank tolerance")
        if out:
            p.add_argument("--out", type=str, default=None, help="output path ('-' = stdout)")
        if pretty:
            p.add_argument("--pretty", action="store_true", help="indent JSON output")

    p = sub.add_parser("gen-mask", help="sample a uniform random mask")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("k", type=int, help="number of observed cells")
    add_common(p, rank=False)
    p.set_defaults(func=_cmd_gen_mask)

    p = sub.add_parser("gen-matrix", help="sample a random rank-r matrix")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    add_common(p)
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser("check", help="full completability report for a mask file")
    p.add_argument("input", help="mask grid file, or '-' for stdin")
    add_common(p, tol=True)
    p.add_argument("--budget", type=int, default=1_000_000,
                   help="partition-search budget (candidate blocks)")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("closure", help="rank closure trace for a mask file")
    p.add_argument("input", help="mask grid file, or '-' for stdin")
    add_common(p)
    p.add_argument("--strategy", choices=["exhaustive", "heuristic"], default="exhaustive")
    p.set_defaults(func=_cmd_closure)

    p = sub.add_parser("complete", help="complete a masked matrix CSV exactly")
    p.add_argument("input", help="masked-matrix CSV, or '-' for stdin")
    add_common(p)
    p.add_argument("--strategy", choices=["exhaustive", "heuristic"], default="exhaustive")
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("fiber", help="fiber-dimension (finiteness) test for a mask file")
    p.add_argument("input", help="mask grid file, or '-' for stdin")
    add_common(p, tol=True)
    p.set_defaults(func=_cmd_fiber)

    p = sub.add_parser("experiment", help="run a success-rate sweep")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rank", "-r", type=int, default=None)
    p.add_argument("--alphas", type=str, default=None,
                   help="comma-separated measurement counts")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--methods", type=str, default=None,
                   help=f"comma-separated subset of {','.join(ALL_METHODS)}")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None,
                   help="relative Frobenius success threshold")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="write measured wall times instead of zeros")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--json-out", type=str, default=None)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MaskFormatError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
