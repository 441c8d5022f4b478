"""Synthetic ground-truth precisions, Gaussian sampling and covariance estimates.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence([seed, stream])``; normal variates are produced by the
Box-Muller transform on its uniform doubles, so a (seed, stream) pair fixes
every value independently of numpy's own normal sampler.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigvalsh, solve_triangular

from .delaunay import delaunay_edges
from .linalg import NoConvergence, cholesky, eig_extremes

__all__ = [
    "DensityUnreachable",
    "GroundTruth",
    "Kind",
    "SampleSet",
    "ZeroVariance",
    "box_muller",
    "default_sample_count",
    "empirical_cov",
    "gen_chain",
    "gen_planar",
    "gen_random",
    "make_ground_truth",
    "make_rng",
    "planar_points",
    "sample_mvn",
    "spd_shift",
    "standardize",
]

log = logging.getLogger(__name__)

STREAM_STRUCTURE = 0
STREAM_SAMPLES = 1


class DensityUnreachable(RuntimeError):
    pass


class ZeroVariance(ValueError):
    pass


class Kind(str, enum.Enum):
    CHAIN = "chain"
    RANDOM = "random"
    PLANAR = "planar"


@dataclass(frozen=True)
class GroundTruth:
    precision: np.ndarray
    kind: Kind
    shift: float
    seed: int
    clamped: int = 0


@dataclass(frozen=True)
class SampleSet:
    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError(f"samples must be an (m >= 1, n) array, got shape {s.shape}")
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def make_rng(seed: int, stream: int = STREAM_STRUCTURE) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` standard normals from pairs of uniforms."""
    half = (size + 1) // 2
    u1 = 1.0 - rng.random(half)  # (0, 1], keeps log finite
    u2 = rng.random(half)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:size]


def gen_chain(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("chain needs n >= 2")
    a = np.eye(n)
    idx = np.arange(n - 1)
    a[idx, idx + 1] = -0.5
    a[idx + 1, idx] = -0.5
    return a


def _gram_of_first(order, signs, n, k):
    rows, cols = np.divmod(order[:k], n)
    u = sparse.csr_matrix((signs[:k], (rows, cols)), shape=(n, n))
    g = (u.T @ u).toarray()
    return g


def _offdiag_fraction(g: np.ndarray) -> float:
    n = g.shape[0]
    return (np.count_nonzero(g) - np.count_nonzero(np.diag(g))) / (n * (n - 1))


def _gen_random(n: int, target_density: float, seed: int) -> tuple[np.ndarray, int]:
    if not 0.0 < target_density < 1.0:
        raise ValueError(f"target_density must be in (0, 1), got {target_density}")
    rng = make_rng(seed)
    # U's entries are switched on in a fixed random order; bisection picks how many.
    order = rng.permutation(n * n)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n * n)
    lo_band, hi_band = 0.8 * target_density, 1.2 * target_density

    lo, hi = 0, n * n
    for _ in range(40):
        k = (lo + hi) // 2
        g = _gram_of_first(order, signs, n, k)
        frac = _offdiag_fraction(g)
        if lo_band <= frac <= hi_band:
            break
        if frac < lo_band:
            lo = k + 1
        else:
            hi = k - 1
        if lo > hi:
            raise DensityUnreachable(
                f"no U density gives off-diagonal fraction within 20% of {target_density}"
            )
    else:
        raise DensityUnreachable(f"bisection did not reach density {target_density}")

    off = ~np.eye(n, dtype=bool)
    over = off & (np.abs(g) > 1.0)
    clamped = int(np.count_nonzero(over))
    g[over] = np.sign(g[over])
    if clamped:
        log.debug("gen_random clamped %d off-diagonal entries to +-1", clamped)
    return g, clamped


def gen_random(n: int, target_density: float = 0.005, seed: int = 0) -> np.ndarray:
    """Sparse Gram matrix ``U^T U`` with +-1 entries in U.

    The number of nonzeros of U is bisected until the off-diagonal nonzero
    fraction of the product is within 20% of ``target_density``; off-diagonal
    magnitudes above 1 are clamped to 1.
    """
    return _gen_random(n, target_density, seed)[0]


def planar_points(n: int, seed: int) -> np.ndarray:
    return make_rng(seed).random((n, 2))


def gen_planar(n: int, seed: int = 0) -> np.ndarray:
    """Graph Laplacian of the Delaunay triangulation of n uniform points."""
    if n < 3:
        raise ValueError("planar graph needs n >= 3")
    edges = delaunay_edges(planar_points(n, seed))
    lap = np.zeros((n, n))
    for i, j in edges:
        lap[i, j] = lap[j, i] = -1.0
    lap[np.diag_indices(n)] = -lap.sum(axis=1)
    return lap


def spd_shift(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Add ``max(-1.2 * lambda_min, 0.1) * I``.

    ``lambda_min`` comes from power iteration. Rank-deficient Gram matrices
    with a slightly negative eigenvalue (after clamping) leave almost no
    spectral gap; if the iteration does not settle, the smallest eigenvalue is
    taken from LAPACK's symmetric eigensolver instead.
    """
    try:
        lam_min, _ = eig_extremes(m)
    except NoConvergence:
        log.debug("spd_shift: power iteration stalled, using dense eigvalsh")
        lam_min = float(eigvalsh(m, subset_by_index=[0, 0])[0])
    shift = max(-1.2 * lam_min, 0.1)
    return m + shift * np.eye(m.shape[0]), shift


def make_ground_truth(
    kind: Kind | str, n: int, seed: int = 0, target_density: float = 0.005
) -> GroundTruth:
    kind = Kind(kind)
    clamped = 0
    if kind is Kind.CHAIN:
        raw = gen_chain(n)
    elif kind is Kind.RANDOM:
        raw, clamped = _gen_random(n, target_density, seed)
    else:
        raw = gen_planar(n, seed)
    precision, shift = spd_shift(raw)
    return GroundTruth(precision, kind, shift, seed, clamped)


def default_sample_count(n: int, ratio: float = 0.03) -> int:
    return max(1, math.ceil(ratio * n))


def sample_mvn(truth: GroundTruth | np.ndarray, m: int, seed: int) -> SampleSet:
    """Draw m zero-mean samples with covariance ``precision^{-1}``.

    With ``precision = L L^T`` and ``z ~ N(0, I)``, ``y = L^{-T} z`` has
    covariance ``(L L^T)^{-1}``.
    """
    precision = truth.precision if isinstance(truth, GroundTruth) else np.asarray(truth)
    n = precision.shape[0]
    fac = cholesky(precision)
    if fac is None:
        raise ValueError("precision is not positive definite")
    z = box_muller(make_rng(seed, STREAM_SAMPLES), m * n).reshape(n, m)
    y = solve_triangular(fac.lower, z, lower=True, trans="T")
    return SampleSet(np.ascontiguousarray(y.T), seed)


def empirical_cov(samples: SampleSet | np.ndarray) -> np.ndarray:
    """Mean-centred second moment with 1/m normalization."""
    y = samples.samples if isinstance(samples, SampleSet) else np.asarray(samples, float)
    centred = y - y.mean(axis=0)
    s = centred.T @ centred / y.shape[0]
    return 0.5 * (s + s.T)


def standardize(s: np.ndarray) -> np.ndarray:
    """Rescale a covariance to a correlation matrix (unit diagonal)."""
    d = np.diag(s)
    if np.any(d <= 1e-12):
        raise ZeroVariance("covariance has a (near) zero variance on the diagonal")
    scale = 1.0 / np.sqrt(d)
    out = s * np.outer(scale, scale)
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out
