"""Proximal-gradient baseline (identity metric in the proximal model).

    A+ = SoftThreshold(A - t*(S - A^{-1}), t*alpha)

Step sizes use the same backtracking contract as pISTA rather than the
Barzilai-Borwein rule G-ISTA is usually run with, so the two solvers differ only
in the direction they propose.
"""
from __future__ import annotations

import numpy as np

from .objective import Problem, soft_threshold
from .solver import IterState, SolveResult, SolverConfig, Step, backtrack, run

__all__ = ["solve_gista"]


def _propose(state: IterState, prob: Problem, cfg: SolverConfig) -> Step | None:
    a, g, alpha = state.a, state.g, prob.alpha

    def candidate(t):
        nxt = soft_threshold(a - t * g, t * alpha)
        return 0.5 * (nxt + nxt.T)

    return backtrack(a, candidate, prob, state.f, cfg)


def solve_gista(
    prob: Problem,
    a0: np.ndarray | None = None,
    cfg: SolverConfig | None = None,
    *,
    keep_steps: bool = False,
) -> SolveResult:
    return run(prob, a0, cfg or SolverConfig(), _propose, keep_steps=keep_steps)
