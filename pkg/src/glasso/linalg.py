"""Dense symmetric linear algebra used by the solvers and generators.

Matrices are plain ``numpy.ndarray`` of dtype float64 with both triangles
stored. Factorization and inversion go through LAPACK (``potrf``/``potri``);
extreme eigenvalues are estimated with power iteration because they only gate
a fallback step size and a diagonal shift.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from threadpoolctl import threadpool_limits

__all__ = [
    "CholeskyFactor",
    "NoConvergence",
    "as_symmetric",
    "cholesky",
    "condition_estimate",
    "eig_extremes",
    "is_pd",
    "log_det",
    "sequential_kernels",
    "spd_inverse",
    "sym_triple_product",
]


class NoConvergence(RuntimeError):
    """Power iteration did not settle within the sweep budget."""


def as_symmetric(a, *, atol: float = 0.0) -> np.ndarray:
    """Return ``a`` as a float64 square array with exactly mirrored triangles.

    Raises ``ValueError`` if ``a`` is not square, is empty, or deviates from
    symmetry by more than ``atol``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    dev = np.max(np.abs(a - a.T))
    if dev > atol:
        raise ValueError(f"matrix is not symmetric (max deviation {dev:.3g})")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor ``lower`` with ``lower @ lower.T == a``."""

    lower: np.ndarray

    @property
    def n(self) -> int:
        return self.lower.shape[0]


def cholesky(a: np.ndarray) -> CholeskyFactor | None:
    """Factor a symmetric matrix, or return ``None`` if it is not PD.

    A pivot at or below ``n * eps * max(diag(a))`` counts as a failure so that
    numerically indefinite iterates are rejected.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        return None
    lower, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        return None
    pivots = np.diag(lower) ** 2
    threshold = n * np.finfo(np.float64).eps * max(float(np.max(np.diag(a))), 0.0)
    if np.min(pivots) <= threshold:
        return None
    return CholeskyFactor(lower)


def is_pd(a: np.ndarray) -> bool:
    return cholesky(a) is not None


def spd_inverse(f: CholeskyFactor) -> np.ndarray:
    inv, info = lapack.dpotri(f.lower, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError(f"potri failed with info={info}")
    inv = np.tril(inv)
    return inv + np.tril(inv, -1).T


def log_det(f: CholeskyFactor) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(f.lower))))


def sym_triple_product(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Compute ``a @ m @ a`` and symmetrize away round-off drift."""
    out = a @ m @ a
    return 0.5 * (out + out.T)


def _power_iteration(
    matvec, n: int, tol: float, max_iter: int, start: np.ndarray
) -> tuple[float, np.ndarray, int]:
    """Dominant Rayleigh quotient of a symmetric PSD operator.

    Stops once the Rayleigh quotient changes by at most ``tol`` relative to
    its magnitude. Returns (quotient, vector, sweeps used).
    """
    x = start / np.linalg.norm(start)
    rq = float(x @ matvec(x))
    for sweep in range(1, max_iter + 1):
        y = matvec(x)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, sweep
        x = y / norm
        new_rq = float(x @ matvec(x))
        if abs(new_rq - rq) <= tol * max(abs(new_rq), np.finfo(float).tiny):
            return new_rq, x, sweep
        rq = new_rq
    raise NoConvergence(f"power iteration did not reach tol={tol} in {max_iter} sweeps")


def _dominant(matvec, n: int, tol: float, max_iter: int, seed: int = 0) -> float:
    """Power iteration from all-ones plus one seeded random restart.

    The all-ones vector is an exact eigenvector of many structured matrices
    (Laplacians, circulants) and orthogonal to the top eigenvector of others
    (the chain), in which case the iteration stagnates on a non-dominant
    eigenvalue. The restart costs one more run; the larger quotient wins.
    """
    rq, _, _ = _power_iteration(matvec, n, tol, max_iter, np.ones(n))
    if n == 1:
        return rq
    rng = np.random.default_rng(seed)
    alt, _, _ = _power_iteration(matvec, n, tol, max_iter, rng.standard_normal(n))
    return max(rq, alt)


def eig_extremes(
    a: np.ndarray, tol: float = 1e-6, max_iter: int | None = None
) -> tuple[float, float]:
    """Estimate ``(lambda_min, lambda_max)`` of a symmetric matrix.

    ``lambda_max`` comes from power iteration on ``a`` (shifted by its
    Gershgorin radius when ``a`` is not PD, so the dominant eigenvalue of the
    iterated operator is the top one). ``lambda_min``
    comes from inverse iteration through the Cholesky factor when ``a`` is PD,
    otherwise from power iteration on ``lambda_max*I - a``.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if max_iter is None:
        max_iter = max(10 * n, 1000)
    if n == 1:
        v = float(a[0, 0])
        return v, v

    radius = float(np.max(np.sum(np.abs(a), axis=1)))
    if radius == 0.0:
        return 0.0, 0.0
    fac = cholesky(a)
    if fac is not None:
        lam_max = _dominant(lambda x: a @ x, n, tol, max_iter)
    else:
        # Gershgorin bound makes a + r*I PSD.
        lam_max = _dominant(lambda x: a @ x + radius * x, n, tol, max_iter) - radius

    if fac is not None:
        lower = fac.lower

        def solve(x):
            y = lapack.dtrtrs(lower, x, lower=1)[0]
            return lapack.dtrtrs(lower, y, lower=1, trans=1)[0]

        lam_min = 1.0 / _dominant(solve, n, tol, max_iter)
    else:
        top = max(lam_max, 0.0) + tol * radius
        lam_min = top - _dominant(lambda x: top * x - a @ x, n, tol, max_iter)
    return lam_min, lam_max


def condition_estimate(a: np.ndarray, tol: float = 1e-6) -> float:
    lam_min, lam_max = eig_extremes(a, tol=tol)
    if lam_min <= 0.0:
        return np.inf
    return lam_max / lam_min


@contextlib.contextmanager
def sequential_kernels():
    """Pin BLAS/LAPACK to one thread so repeated runs are bit-identical."""
    with threadpool_limits(limits=1):
        yield
