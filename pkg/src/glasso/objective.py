"""GLASSO objective pieces shared by both solvers.

    F(A) = -log det A + <S, A> + alpha * sum_ij |A_ij|

The l1 term includes the diagonal. Everything here is elementwise or
O(n^2) except where the caller supplies the log-determinant or inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_symmetric

__all__ = [
    "Problem",
    "f_smooth",
    "f_total",
    "free_set",
    "gradient",
    "min_subgradient",
    "norms",
    "soft_threshold",
]


@dataclass(frozen=True)
class Problem:
    """One GLASSO instance: empirical covariance ``s`` and l1 weight ``alpha``.

    ``truth`` optionally holds the ground-truth precision for reporting; the
    solvers never look at it.
    """

    s: np.ndarray
    alpha: float
    truth: np.ndarray | None = None

    def __post_init__(self):
        s = as_symmetric(self.s, atol=1e-12)
        if np.any(np.diag(s) < 0):
            raise ValueError("covariance diagonal must be non-negative")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.s.shape[0]


def f_smooth(a: np.ndarray, prob: Problem, logdet: float) -> float:
    return -logdet + float(np.sum(prob.s * a))


def f_total(a: np.ndarray, prob: Problem, logdet: float) -> float:
    return f_smooth(a, prob, logdet) + prob.alpha * float(np.sum(np.abs(a)))


def gradient(w: np.ndarray, prob: Problem) -> np.ndarray:
    """Gradient ``S - W`` of the smooth part, given ``W = A^{-1}``."""
    return prob.s - w


def soft_threshold(x, tau):
    """Elementwise ``sign(x) * max(|x| - tau, 0)``; scalars in, scalar out."""
    out = np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def free_set(a: np.ndarray, g: np.ndarray, alpha: float) -> np.ndarray:
    """Boolean mask of entries that are nonzero or whose gradient exceeds alpha."""
    return (a != 0.0) | (np.abs(g) > alpha)


def min_subgradient(a: np.ndarray, g: np.ndarray, alpha: float) -> np.ndarray:
    """Minimum-magnitude element of the subdifferential of F, entrywise."""
    return np.where(
        a != 0.0,
        g + alpha * np.sign(a),
        np.sign(g) * np.maximum(np.abs(g) - alpha, 0.0),
    )


def norms(m: np.ndarray) -> tuple[float, float, int]:
    """(l1, Frobenius, exact nonzero count) of a matrix."""
    return (
        float(np.sum(np.abs(m))),
        float(np.linalg.norm(m)),
        int(np.count_nonzero(m)),
    )
