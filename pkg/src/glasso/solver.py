"""Configuration, traces and the iteration driver shared by pISTA and G-ISTA.

Both solvers are proximal methods that differ only in how a candidate iterate
is built from a step size ``t``. The driver owns initialization, the stopping
rule, the backtracking linesearch (positive definiteness plus strict decrease
of F) and trace bookkeeping; a solver supplies a ``propose`` callback.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import CholeskyFactor, cholesky, condition_estimate, log_det, spd_inverse
from .objective import Problem, f_total, gradient, min_subgradient, norms

__all__ = [
    "IterState",
    "IterTrace",
    "NonPositiveDiagonal",
    "SolveResult",
    "SolverConfig",
    "Step",
    "Termination",
    "backtrack",
    "init_diagonal",
    "run",
]


class NonPositiveDiagonal(ValueError):
    """``S_ii + alpha <= 0`` for some i, so the diagonal start is undefined."""


class Termination(str, enum.Enum):
    CRITERION = "Criterion"
    MAX_ITER = "MaxIter"
    LINESEARCH_STALL = "LinesearchStall"


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 100
    stop_rel: float = 1e-2
    t_init: float = 1.0
    backtrack: float = 0.5
    t_floor: float = 1e-4
    fallback_safety: float = 0.9
    trace: bool = True

    def __post_init__(self):
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError(f"backtrack must be in (0, 1), got {self.backtrack}")
        if not self.t_floor > 0.0:
            raise ValueError(f"t_floor must be positive, got {self.t_floor}")
        if not self.stop_rel > 0.0:
            raise ValueError(f"stop_rel must be positive, got {self.stop_rel}")
        if not self.t_init > 0.0:
            raise ValueError(f"t_init must be positive, got {self.t_init}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be non-negative, got {self.max_iter}")


@dataclass(frozen=True)
class IterTrace:
    """One accepted iteration. ``wall_ms`` is cumulative since the solve began."""

    iter: int
    f_total: float
    min_subgrad_l1: float
    min_subgrad_fro: float
    nnz: int
    step_t: float
    linesearch_trials: int
    wall_ms: float


@dataclass(frozen=True)
class SolveResult:
    estimate: np.ndarray
    traces: list[IterTrace]
    converged: bool
    iterations: int
    termination: Termination
    f_final: float
    min_subgrad_l1: float
    min_subgrad_fro: float
    nnz: int
    wall_seconds: float
    steps: list[np.ndarray] = field(default_factory=list, repr=False)
    masks: list[np.ndarray] = field(default_factory=list, repr=False)
    iterates: list[np.ndarray] = field(default_factory=list, repr=False)


@dataclass
class IterState:
    """Quantities available at the current iterate."""

    a: np.ndarray
    chol: CholeskyFactor
    w: np.ndarray
    g: np.ndarray
    f: float


@dataclass(frozen=True)
class Step:
    t: float
    a_next: np.ndarray
    chol_next: CholeskyFactor
    f_next: float
    trials: int
    mask: np.ndarray | None = None


def init_diagonal(prob: Problem) -> np.ndarray:
    d = np.diag(prob.s) + prob.alpha
    if np.any(d <= 0):
        raise NonPositiveDiagonal("S_ii + alpha must be positive for every i")
    return np.diag(1.0 / d)


def backtrack(
    a: np.ndarray,
    candidate: Callable[[float], np.ndarray],
    prob: Problem,
    f_curr: float,
    cfg: SolverConfig,
) -> Step | None:
    """Find ``t`` so ``candidate(t)`` is PD and strictly lowers F.

    Tries ``t_init, t_init*backtrack, ...`` while ``t >= t_floor``, then the
    step ``(fallback_safety / cond(a))**2`` once. Returns ``None`` on stall.
    """
    trials = 0

    def attempt(t):
        nonlocal trials
        trials += 1
        cand = candidate(t)
        chol = cholesky(cand)
        if chol is None:
            return None
        f_next = f_total(cand, prob, log_det(chol))
        if not f_next < f_curr:
            return None
        return Step(t, cand, chol, f_next, trials)

    t = cfg.t_init
    while t >= cfg.t_floor:
        step = attempt(t)
        if step is not None:
            return step
        t *= cfg.backtrack

    t_fb = (cfg.fallback_safety / condition_estimate(a)) ** 2
    if t_fb > 0.0:
        return attempt(t_fb)
    return None


def _state(a, chol, prob, f=None) -> IterState:
    w = spd_inverse(chol)
    if f is None:
        f = f_total(a, prob, log_det(chol))
    return IterState(a=a, chol=chol, w=w, g=gradient(w, prob), f=f)


def run(
    prob: Problem,
    a0: np.ndarray | None,
    cfg: SolverConfig,
    propose: Callable[[IterState, Problem, SolverConfig], Step | None],
    keep_steps: bool = False,
) -> SolveResult:
    """Iterate ``propose`` until the min-subgradient criterion, max_iter or stall.

    The criterion ``||min subgrad||_1 < stop_rel * ||A||_1`` is tested at the
    top of every iteration, so a start that is already optimal reports zero
    iterations. With ``keep_steps`` the accepted iterates, the updates that
    produced them and the free-set masks are retained on the result.
    """
    start = time.perf_counter()
    a = init_diagonal(prob) if a0 is None else np.array(a0, dtype=np.float64)
    chol = cholesky(a)
    if chol is None:
        raise ValueError("initial iterate is not positive definite")
    state = _state(a, chol, prob)

    traces: list[IterTrace] = []
    steps: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    iterates: list[np.ndarray] = []
    k = 0
    last: Step | None = None
    while True:
        sub = min_subgradient(state.a, state.g, prob.alpha)
        sub_l1, sub_fro, _ = norms(sub)
        a_l1 = float(np.sum(np.abs(state.a)))
        if last is not None and cfg.trace:
            traces.append(
                IterTrace(
                    iter=k,
                    f_total=state.f,
                    min_subgrad_l1=sub_l1,
                    min_subgrad_fro=sub_fro,
                    nnz=int(np.count_nonzero(state.a)),
                    step_t=last.t,
                    linesearch_trials=last.trials,
                    wall_ms=1e3 * (time.perf_counter() - start),
                )
            )
        if sub_l1 < cfg.stop_rel * a_l1:
            termination = Termination.CRITERION
            break
        if k >= cfg.max_iter:
            termination = Termination.MAX_ITER
            break
        step = propose(state, prob, cfg)
        if step is None:
            # Same iterate, so the criterion cannot newly hold; an all-zero
            # minimum subgradient still counts as converged.
            termination = Termination.CRITERION if sub_l1 == 0.0 else Termination.LINESEARCH_STALL
            break
        if keep_steps:
            steps.append(step.a_next - state.a)
            masks.append(step.mask)
            iterates.append(step.a_next)
        state = _state(step.a_next, step.chol_next, prob, f=step.f_next)
        last = step
        k += 1

    return SolveResult(
        estimate=state.a,
        traces=traces,
        converged=termination is Termination.CRITERION,
        iterations=k,
        termination=termination,
        f_final=state.f,
        min_subgrad_l1=sub_l1,
        min_subgrad_fro=sub_fro,
        nnz=int(np.count_nonzero(state.a)),
        wall_seconds=time.perf_counter() - start,
        steps=steps,
        masks=masks,
        iterates=iterates,
    )
