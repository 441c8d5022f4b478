"""Command line entry point: ``glasso generate | solve | bench``.

Exit codes: 0 success (a solver stall still produces a result), 2 usage,
3 bad input, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import SOLVERS, BenchSpec, build_problem, record_for, run_bench, write_outputs
from .io import Format, MatrixIOError, read_matrix, read_samples, write_matrix_market, write_samples
from .linalg import NoConvergence, sequential_kernels
from .objective import Problem
from .problems import DensityUnreachable, Kind, ZeroVariance, empirical_cov, standardize
from .solver import NonPositiveDiagonal, SolverConfig

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("glasso")


class UsageError(Exception):
    pass


def _config(args) -> SolverConfig:
    return SolverConfig(
        max_iter=args.max_iter,
        stop_rel=args.stop_rel,
        t_init=args.t_init,
        backtrack=args.backtrack,
        t_floor=args.t_floor,
    )


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--stop-rel", type=float, default=1e-2)
    p.add_argument("--t-init", type=float, default=1.0)
    p.add_argument("--backtrack", type=float, default=0.5)
    p.add_argument("--t-floor", type=float, default=1e-4)
    p.add_argument("--sequential", action="store_true", help="single-threaded BLAS, bit-reproducible")


def cmd_generate(args) -> int:
    sp = build_problem(
        args.kind, args.n, alpha=1.0, seed=args.seed, m=args.m,
        sample_ratio=args.sample_ratio, standardize_cov=args.standardize,
    )
    prefix = args.out
    Path(prefix + "x").parent.mkdir(parents=True, exist_ok=True)
    meta = f"kind={args.kind} n={args.n} seed={args.seed} shift={sp.truth.shift!r}"
    write_matrix_market(sp.truth.precision, prefix + "precision.mtx", comment=meta)
    write_samples(sp.samples, prefix + "samples.csv")
    write_matrix_market(sp.cov, prefix + "cov.mtx", comment=meta)
    print(f"shift={sp.truth.shift!r} m={sp.samples.m} nnz={np.count_nonzero(sp.truth.precision)}")
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.cov is not None:
        s = read_matrix(args.cov, args.format)
        m = None
        if args.standardize:
            s = standardize(s)
    else:
        samples = read_samples(args.samples)
        m = samples.m
        s = empirical_cov(samples)
        if args.standardize:
            s = standardize(s)
    prob = Problem(s, args.alpha)
    cfg = _config(args)
    result = SOLVERS[args.solver](prob, cfg=cfg)
    record = record_for(result, solver=args.solver, cfg=cfg, alpha=args.alpha, n=prob.n, m=m)
    write_outputs(args.out, result, record)
    print(
        f"{args.solver} iter={result.iterations} time={result.wall_seconds:.4f} "
        f"f={result.f_final!r} nnz={result.nnz} subgrad_l1={result.min_subgrad_l1!r}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        spec = BenchSpec(
            kinds=args.kind,
            n=args.n,
            alphas=args.alpha,
            seeds=args.seed,
            solvers=args.solver,
            sample_ratio=args.sample_ratio,
            standardize=not args.raw_cov,
            config=_config(args),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = run_bench(spec, args.out, jobs=args.jobs, sequential=args.sequential)
    print(path.read_text(encoding="utf-8"), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glasso", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in Kind]

    g = sub.add_parser("generate", help="write ground truth, samples and covariance")
    g.add_argument("--kind", choices=kinds, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int, default=None, help="sample count (default ceil(ratio*n))")
    g.add_argument("--sample-ratio", type=float, default=0.03)
    g.add_argument("--standardize", action="store_true", help="write the correlation matrix as cov.mtx")
    g.add_argument("--out", required=True, help="output path prefix")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one problem from a covariance or samples file")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--cov", help="covariance matrix (.mtx or dense .csv)")
    src.add_argument("--samples", help="samples CSV, one row per sample")
    s.add_argument("--format", choices=[f.value for f in Format], default=None)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--solver", choices=sorted(SOLVERS), default="pista")
    s.add_argument("--standardize", action="store_true", help="rescale S to unit diagonal")
    s.add_argument("--out", required=True, help="output path prefix")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="seed-averaged solver comparison on synthetic problems")
    b.add_argument("--kind", nargs="+", choices=kinds, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--alpha", nargs="+", type=float, required=True)
    b.add_argument("--seed", nargs="+", type=int, default=[0, 1, 2, 3, 4])
    b.add_argument("--solver", nargs="+", choices=sorted(SOLVERS), default=["pista", "gista"])
    b.add_argument("--sample-ratio", type=float, default=0.03)
    scale = b.add_mutually_exclusive_group()
    scale.add_argument("--standardize", action="store_true", help="rescale S to unit diagonal (default)")
    scale.add_argument("--raw-cov", action="store_true", help="skip standardizing S to unit diagonal")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", required=True, help="output directory")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    ctx = sequential_kernels() if getattr(args, "sequential", False) else contextlib.nullcontext()
    try:
        with ctx:
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"glasso: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoConvergence, DensityUnreachable, np.linalg.LinAlgError) as exc:
        print(f"glasso: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MatrixIOError, ZeroVariance, NonPositiveDiagonal, OSError, ValueError) as exc:
        print(f"glasso: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
