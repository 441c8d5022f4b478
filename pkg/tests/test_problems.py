import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from glasso.delaunay import delaunay_edges, delaunay_triangles, in_circumcircle
from glasso.linalg import cholesky
from glasso.problems import (
    DensityUnreachable,
    GroundTruth,
    Kind,
    SampleSet,
    ZeroVariance,
    _gen_random,
    box_muller,
    default_sample_count,
    empirical_cov,
    gen_chain,
    gen_planar,
    gen_random,
    make_ground_truth,
    make_rng,
    planar_points,
    sample_mvn,
    spd_shift,
    standardize,
)
from oracles import chain_spectrum, circumcircle_empty


def offdiag_fraction(g):
    n = g.shape[0]
    return (np.count_nonzero(g) - np.count_nonzero(np.diag(g))) / (n * (n - 1))


# -- chain -------------------------------------------------------------------


def test_chain_examples():
    np.testing.assert_array_equal(gen_chain(2), [[1, -0.5], [-0.5, 1]])
    c3 = gen_chain(3)
    assert np.count_nonzero(c3) == 7
    np.testing.assert_array_equal(np.diag(c3), 1.0)
    assert c3[0, 2] == 0 and c3[0, 1] == c3[2, 1] == -0.5
    assert np.linalg.eigvalsh(gen_chain(4))[0] == pytest.approx(0.190983, abs=1e-6)
    np.testing.assert_allclose(np.linalg.eigvalsh(gen_chain(9)), chain_spectrum(9), atol=1e-12)


def test_chain_rejects_n1():
    with pytest.raises(ValueError):
        gen_chain(1)


# -- random ------------------------------------------------------------------


def test_random_density_band():
    g = gen_random(200, 0.005, seed=0)
    assert 0.004 <= offdiag_fraction(g) <= 0.006
    np.testing.assert_array_equal(g, g.T)
    off = g[~np.eye(200, dtype=bool)]
    assert np.all(np.abs(off) <= 1.0)


def test_random_is_reproducible():
    np.testing.assert_array_equal(gen_random(150, 0.01, 3), gen_random(150, 0.01, 3))


def test_random_rejects_bad_density():
    with pytest.raises(ValueError):
        gen_random(20, 0.0)
    with pytest.raises(ValueError):
        gen_random(20, 1.0)


def test_random_unreachable_density():
    # n=5 gives off-diagonal fractions in steps of 0.1; 0.005 +- 20% is empty
    with pytest.raises(DensityUnreachable):
        gen_random(5, 0.005, 0)


def test_single_column_gram_has_one_diagonal_entry():
    u = np.zeros((6, 6))
    u[:, 2] = [1, -1, 1, 1, -1, 1]
    g = u.T @ u
    assert np.count_nonzero(g) == 1 and g[2, 2] == 6


def test_random_psd_before_shift_small_n():
    checked = 0
    for n in range(10, 31):
        for seed in range(10):
            try:
                g = gen_random(n, 0.005, seed)
            except DensityUnreachable:
                continue
            checked += 1
            assert np.linalg.eigvalsh(g)[0] >= -1e-8
    assert checked > 20


@pytest.mark.parametrize("n, density", [(20, 0.1), (30, 0.2), (40, 0.1)])
def test_random_unclamped_outputs_are_psd(n, density):
    for seed in range(5):
        g, clamped = _gen_random(n, density, seed)
        lam = np.linalg.eigvalsh(g)[0]
        if clamped == 0:
            assert lam >= -1e-8
        # clamped or not, the shifted matrix is a valid precision
        shifted, shift = spd_shift(g)
        assert cholesky(shifted) is not None
        # no spectral gap at the bottom of a rank-deficient Gram matrix, so the
        # power-iteration estimate is only percent-accurate here
        assert shift == pytest.approx(max(-1.2 * lam, 0.1), rel=2e-2)


# -- planar ------------------------------------------------------------------


def test_planar_three_points_is_one_triangle():
    np.testing.assert_array_equal(gen_planar(3, 0), [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


@pytest.mark.parametrize("n, seed", [(3, 1), (10, 0), (57, 4), (200, 2)])
def test_planar_is_laplacian(n, seed):
    lap = gen_planar(n, seed)
    np.testing.assert_array_equal(lap.sum(axis=1), 0.0)
    off = lap[~np.eye(n, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, -1.0}
    assert np.linalg.eigvalsh(lap)[0] == pytest.approx(0.0, abs=1e-9)
    edges = (np.count_nonzero(lap) - n) // 2
    assert edges <= 3 * n - 6


def test_planar_reproducible():
    np.testing.assert_array_equal(gen_planar(80, 5), gen_planar(80, 5))


def test_delaunay_empty_circumcircle_n20():
    pts = planar_points(20, 0)
    tris = delaunay_triangles(pts)
    assert len(tris) > 0
    for tri in tris:
        assert circumcircle_empty(pts, tri)


def test_delaunay_square_has_two_triangles():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.2]])
    assert len(delaunay_triangles(pts)) == 2
    assert len(delaunay_edges(pts)) == 5


def test_delaunay_rejects_duplicates():
    with pytest.raises(ValueError):
        delaunay_triangles(np.array([[0, 0], [1, 0], [0, 1], [1, 0]], dtype=float))


def test_in_circumcircle_examples():
    a, b, c = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)
    assert in_circumcircle(a, b, c, (0.5, 0.5 - 1e-3))
    assert in_circumcircle(c, b, a, (0.4, 0.4))  # orientation independent
    assert not in_circumcircle(a, b, c, (1.0, 1.0))  # cocircular
    assert not in_circumcircle(a, b, c, (2.0, 2.0))


@given(st.integers(3, 40), st.integers(0, 10_000))
def test_delaunay_property(n, seed):
    pts = make_rng(seed).random((n, 2))
    tris = delaunay_triangles(pts)
    for tri in tris:
        assert circumcircle_empty(pts, tri)
    edges = delaunay_edges(pts)
    assert len(edges) <= 3 * n - 6
    assert all(i < j for i, j in edges)


# -- shift -------------------------------------------------------------------


def test_spd_shift_examples():
    lap = gen_planar(3, 0)
    out, shift = spd_shift(lap)
    assert shift == pytest.approx(0.1)
    out, shift = spd_shift(-np.eye(3))
    assert shift == pytest.approx(1.2, rel=1e-6)
    np.testing.assert_allclose(out, 0.2 * np.eye(3), atol=1e-6)
    _, shift = spd_shift(gen_chain(4))
    assert shift == 0.1


@pytest.mark.parametrize("kind", list(Kind))
@pytest.mark.parametrize("seed", [0, 1])
def test_ground_truth_is_pd(kind, seed):
    gt = make_ground_truth(kind, 120, seed)
    assert isinstance(gt, GroundTruth) and gt.kind is kind
    assert cholesky(gt.precision) is not None
    assert gt.shift >= 0.1


# -- sampling ----------------------------------------------------------------


def test_make_rng_streams_differ():
    a = make_rng(5, 0).random(4)
    b = make_rng(5, 1).random(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, make_rng(5, 0).random(4))


def test_box_muller_moments():
    z = box_muller(make_rng(0, 1), 200_001)
    assert len(z) == 200_001
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01


def test_sample_identity_lln():
    s = sample_mvn(np.eye(5), 10_000, seed=3)
    assert (s.m, s.n) == (10_000, 5)
    assert np.max(np.abs(empirical_cov(s) - np.eye(5))) < 0.1


def test_sample_quadratic_form_average():
    p = make_ground_truth("chain", 5, 0).precision
    y = sample_mvn(p, 10_000, seed=1).samples
    q = np.mean(np.einsum("ij,jk,ik->i", y, p, y))
    assert abs(q - 5) < 0.5


def test_single_sample_rank():
    s = sample_mvn(np.eye(4), 1, seed=0)
    assert np.linalg.matrix_rank(empirical_cov(s)) <= 1


def test_sampling_is_deterministic():
    gt = make_ground_truth("planar", 30, 2)
    a = sample_mvn(gt, 7, seed=2).samples
    b = sample_mvn(gt, 7, seed=2).samples
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, sample_mvn(gt, 7, seed=3).samples)


def test_sample_mvn_rejects_indefinite():
    with pytest.raises(ValueError):
        sample_mvn(-np.eye(2), 3, 0)


def test_default_sample_count():
    assert default_sample_count(1000) == 30
    assert default_sample_count(100) == 3
    assert default_sample_count(10) == 1
    assert default_sample_count(1) == 1


def test_sample_set_validates():
    with pytest.raises(ValueError):
        SampleSet(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        SampleSet(np.zeros(3))


# -- covariance --------------------------------------------------------------


def test_empirical_cov_examples():
    v = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(empirical_cov(np.vstack([v, -v])), np.outer(v, v))
    np.testing.assert_array_equal(empirical_cov(np.array([[3.0, 4.0]])), np.zeros((2, 2)))
    y = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    np.testing.assert_allclose(empirical_cov(y), np.array([[2, 1], [1, 2]]) / 3)


def test_standardize_examples():
    np.testing.assert_array_equal(standardize(np.diag([4.0, 9.0])), np.eye(2))
    np.testing.assert_allclose(standardize(np.array([[4.0, 2.0], [2.0, 1.0]])), np.ones((2, 2)))
    with pytest.raises(ZeroVariance):
        standardize(np.diag([1.0, 0.0]))


@given(st.integers(2, 8), st.integers(2, 30), st.integers(0, 1000))
def test_standardize_unit_diagonal(n, m, seed):
    y = make_rng(seed).standard_normal((m, n))
    out = standardize(empirical_cov(y))
    assert np.all(np.diag(out) == 1.0)
    np.testing.assert_array_equal(out, out.T)
    assert np.all(np.abs(out) <= 1 + 1e-12)


def test_spd_shift_falls_back_when_power_iteration_stalls(monkeypatch):
    import glasso.problems as problems
    from glasso.linalg import NoConvergence

    def stall(*args, **kwargs):
        raise NoConvergence("forced")

    monkeypatch.setattr(problems, "eig_extremes", stall)
    m = np.diag([-2.0, 1.0, 3.0])
    out, shift = problems.spd_shift(m)
    assert shift == pytest.approx(2.4)
    np.testing.assert_allclose(np.diag(out), [0.4, 3.4, 5.4])
