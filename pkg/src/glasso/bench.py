"""Experiment harness: build synthetic problems, solve them, aggregate results.

A benchmark cell is one (kind, alpha, solver, seed). Problems are rebuilt from
(kind, n, seed) so cells are independent and may run in a process pool;
aggregation sorts rows so the summary never depends on completion order.
"""
from __future__ import annotations

import contextlib
import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .gista import solve_gista
from .io import RunRecord, write_matrix_market, write_result, write_trace
from .linalg import sequential_kernels
from .objective import Problem
from .pista import solve_pista
from .problems import (
    GroundTruth,
    Kind,
    SampleSet,
    default_sample_count,
    empirical_cov,
    make_ground_truth,
    sample_mvn,
    standardize,
)
from .solver import SolveResult, SolverConfig

__all__ = [
    "SOLVERS",
    "BenchSpec",
    "SyntheticProblem",
    "build_problem",
    "record_for",
    "run_bench",
    "write_outputs",
]

log = logging.getLogger(__name__)

SOLVERS = {"pista": solve_pista, "gista": solve_gista}

SUMMARY_HEADER = [
    "kind",
    "n",
    "m",
    "alpha",
    "solver",
    "runs",
    "failures",
    "converged",
    "mean_iter",
    "mean_nnz",
    "mean_subgrad_fro",
    "mean_subgrad_l1",
    "mean_final_f",
]
TIMING_HEADER = ["kind", "n", "alpha", "solver", "runs", "mean_time_s"]


@dataclass(frozen=True)
class SyntheticProblem:
    truth: GroundTruth
    samples: SampleSet
    cov: np.ndarray
    problem: Problem


def build_problem(
    kind: Kind | str,
    n: int,
    alpha: float,
    seed: int,
    m: int | None = None,
    sample_ratio: float = 0.03,
    standardize_cov: bool = True,
) -> SyntheticProblem:
    """Ground truth, samples and the (by default standardized) covariance.

    Standardizing to unit diagonal makes alpha scale-free; the benchmark
    defaults assume it.
    """
    truth = make_ground_truth(kind, n, seed)
    m = default_sample_count(n, sample_ratio) if m is None else m
    samples = sample_mvn(truth, m, seed)
    cov = empirical_cov(samples)
    if standardize_cov:
        cov = standardize(cov)
    return SyntheticProblem(truth, samples, cov, Problem(cov, alpha, truth.precision))


def record_for(
    result: SolveResult,
    *,
    solver: str,
    cfg: SolverConfig,
    alpha: float,
    n: int,
    kind: str = "file",
    m: int | None = None,
    seed: int | None = None,
    shift: float | None = None,
) -> RunRecord:
    return RunRecord(
        kind=kind,
        n=n,
        m=m,
        alpha=float(alpha),
        seed=seed,
        shift=shift,
        solver=solver,
        config=asdict(cfg),
        iterations=result.iterations,
        termination=result.termination.value,
        converged=result.converged,
        final_f=result.f_final,
        min_subgrad_l1=result.min_subgrad_l1,
        min_subgrad_fro=result.min_subgrad_fro,
        nnz=result.nnz,
        wall_seconds=result.wall_seconds,
    )


def write_outputs(prefix: str, result: SolveResult, record: RunRecord) -> None:
    """Write ``<prefix>estimate.mtx``, ``<prefix>trace.csv``, ``<prefix>result.json``."""
    Path(prefix + "x").parent.mkdir(parents=True, exist_ok=True)
    write_matrix_market(result.estimate, prefix + "estimate.mtx")
    write_trace(result.traces, prefix + "trace.csv")
    write_result(record, prefix + "result.json")


@dataclass(frozen=True)
class BenchSpec:
    kinds: list[str]
    n: int
    alphas: list[float]
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    solvers: list[str] = field(default_factory=lambda: ["pista", "gista"])
    sample_ratio: float = 0.03
    standardize: bool = True
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        for name in ("kinds", "alphas", "seeds", "solvers"):
            if not getattr(self, name):
                raise ValueError(f"bench spec needs a non-empty {name} list")
        for k in self.kinds:
            Kind(k)
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)}")
        if not self.sample_ratio > 0:
            raise ValueError("sample_ratio must be positive")
        if self.n < 3:
            raise ValueError("n must be at least 3")


def _cell_prefix(out_dir: Path, kind, alpha, solver, seed) -> str:
    return str(out_dir / "runs" / f"{kind}_a{alpha:g}_{solver}_s{seed}_")


def _run_cell(args) -> dict:
    spec, kind, alpha, solver, seed, out_dir = args
    row = {"kind": kind, "alpha": alpha, "solver": solver, "seed": seed}
    try:
        prob = build_problem(
            kind, spec.n, alpha, seed, sample_ratio=spec.sample_ratio,
            standardize_cov=spec.standardize,
        )
        t0 = time.perf_counter()
        result = SOLVERS[solver](prob.problem, cfg=spec.config)
        elapsed = time.perf_counter() - t0
        record = record_for(
            result, solver=solver, cfg=spec.config, alpha=alpha, n=spec.n,
            kind=kind, m=prob.samples.m, seed=seed, shift=prob.truth.shift,
        )
        record.wall_seconds = elapsed
        write_outputs(_cell_prefix(out_dir, kind, alpha, solver, seed), result, record)
        row.update(ok=True, m=prob.samples.m, record=record)
    except Exception as exc:  # a failed cell is reported, the bench goes on
        log.warning("bench cell %s failed: %s", row, exc)
        row.update(ok=False, error=repr(exc))
    return row


def _mean(xs) -> float:
    return float(sum(xs) / len(xs)) if xs else float("nan")


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def run_bench(spec: BenchSpec, out_dir, jobs: int = 1, sequential: bool = False) -> Path:
    """Run every cell and write ``summary.csv`` and ``timing.csv`` to ``out_dir``.

    ``summary.csv`` holds only deterministic quantities so identical specs
    reproduce it byte for byte; wall-clock means go to ``timing.csv``.
    """
    out_dir = Path(out_dir)
    (out_dir / "runs").mkdir(parents=True, exist_ok=True)
    cells = [
        (spec, kind, float(alpha), solver, int(seed), out_dir)
        for kind in spec.kinds
        for alpha in spec.alphas
        for solver in spec.solvers
        for seed in spec.seeds
    ]
    if sequential or jobs <= 1:
        with sequential_kernels() if sequential else contextlib.nullcontext():
            rows = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))

    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["kind"], r["alpha"], r["solver"]), []).append(r)

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as sf, open(
        out_dir / "timing.csv", "w", encoding="utf-8", newline=""
    ) as tf:
        sw = csv.writer(sf, lineterminator="\n")
        tw = csv.writer(tf, lineterminator="\n")
        sw.writerow(SUMMARY_HEADER)
        tw.writerow(TIMING_HEADER)
        for kind, alpha, solver in sorted(groups):
            cell = sorted(groups[(kind, alpha, solver)], key=lambda r: r["seed"])
            recs = [r["record"] for r in cell if r["ok"]]
            ms = sorted({r["m"] for r in cell if r["ok"]})
            sw.writerow(
                _fmt(v)
                for v in (
                    kind,
                    spec.n,
                    ms[0] if len(ms) == 1 else "/".join(map(str, ms)),
                    alpha,
                    solver,
                    len(cell),
                    len(cell) - len(recs),
                    sum(r.converged for r in recs),
                    _mean([float(r.iterations) for r in recs]),
                    _mean([float(r.nnz) for r in recs]),
                    _mean([r.min_subgrad_fro for r in recs]),
                    _mean([r.min_subgrad_l1 for r in recs]),
                    _mean([r.final_f for r in recs]),
                )
            )
            tw.writerow(
                _fmt(v)
                for v in (kind, spec.n, alpha, solver, len(recs), _mean([r.wall_seconds for r in recs]))
            )
    return summary_path

