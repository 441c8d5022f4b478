"""Preconditioned iterative soft-thresholding (pISTA) for the graphical lasso.

Each iteration restricts the update to the free set, preconditions the
quasi-Newton subproblem with the inverse Hessian ``A kron A`` and solves it
entrywise in closed form:

    D(t) = -A + SoftThreshold(A - t*B, t*C)

where ``C`` is the diagonal of ``alpha * A kron A`` (arranged as a matrix) and
``B`` collects the gradient and the guessed l1 subgradient of every other
entry. ``B`` and ``C`` do not depend on ``t``; the linesearch recomputes only
the thresholding.
"""
from __future__ import annotations

import numpy as np

from .linalg import sym_triple_product
from .objective import Problem, free_set, soft_threshold
from .solver import (
    IterState,
    SolveResult,
    SolverConfig,
    Step,
    backtrack,
    init_diagonal,
    run,
)

__all__ = [
    "b_matrix",
    "c_matrix",
    "direction",
    "g_sign_approx",
    "init_diagonal",
    "linesearch",
    "scalar_sign_solve",
    "solve_pista",
]


def g_sign_approx(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Guess the l1 subgradient at the next iterate.

    Nonzero entries keep their sign; zero entries take the sign a small
    proximal-gradient step would give them, ``-sign(g)`` (0 where g is 0).
    """
    return np.where(a != 0.0, np.sign(a), -np.sign(g))


def c_matrix(a: np.ndarray, alpha: float) -> np.ndarray:
    d = np.diag(a)
    c = np.outer(d, d) + a * a
    np.fill_diagonal(c, d * d)
    return alpha * c


def b_matrix(
    a: np.ndarray,
    g: np.ndarray,
    gsign: np.ndarray,
    mask: np.ndarray,
    c: np.ndarray,
    alpha: float,
) -> np.ndarray:
    # A(g.M)A + alpha*A(G.M)A folded into one triple product.
    masked_sign = gsign * mask
    return sym_triple_product(a, (g + alpha * gsign) * mask) - c * masked_sign


def direction(a: np.ndarray, b: np.ndarray, c: np.ndarray, t: float) -> np.ndarray:
    return -a + soft_threshold(a - t * b, t * c)


def scalar_sign_solve(a: float, b: float, c: float) -> float:
    """Solve ``0 in x + b + c*T(x + a)`` for scalar x, with T the sign map.

    ``T(0)`` is the whole interval [-1, 1]; ``c`` must be positive.
    """
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    return -a + soft_threshold(a - b, c)


def linesearch(
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    mask: np.ndarray,
    prob: Problem,
    f_curr: float,
    cfg: SolverConfig,
) -> Step | None:
    """Backtrack on t, rebuilding ``A + M.D(t)`` at every trial.

    Returns ``None`` when neither the backtracking schedule nor the
    condition-number fallback yields a PD iterate with lower F.
    """
    step = backtrack(a, lambda t: a + mask * direction(a, b, c, t), prob, f_curr, cfg)
    if step is None:
        return None
    return Step(step.t, step.a_next, step.chol_next, step.f_next, step.trials, mask)


def _propose(state: IterState, prob: Problem, cfg: SolverConfig) -> Step | None:
    a, g, alpha = state.a, state.g, prob.alpha
    mask = free_set(a, g, alpha)
    if not mask.any():
        return None
    gsign = g_sign_approx(a, g)
    c = c_matrix(a, alpha)
    b = b_matrix(a, g, gsign, mask, c, alpha)
    return linesearch(a, b, c, mask, prob, state.f, cfg)


def solve_pista(
    prob: Problem,
    a0: np.ndarray | None = None,
    cfg: SolverConfig | None = None,
    *,
    keep_steps: bool = False,
) -> SolveResult:
    """Run pISTA from ``a0`` (default: ``diag(1 / (S_ii + alpha))``)."""
    return run(prob, a0, cfg or SolverConfig(), _propose, keep_steps=keep_steps)
