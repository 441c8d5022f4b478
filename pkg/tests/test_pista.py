import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from glasso.linalg import cholesky, log_det, spd_inverse
from glasso.objective import Problem, f_total, free_set, gradient, min_subgradient
from glasso.pista import (
    b_matrix,
    c_matrix,
    direction,
    g_sign_approx,
    init_diagonal,
    linesearch,
    scalar_sign_solve,
    solve_pista,
)
from glasso.solver import NonPositiveDiagonal, SolverConfig, Termination, backtrack
from oracles import F_ref, prox_grad_reference, random_glasso_problem

# Frozen from scripts/derive_2x2_instance.py (exact rationals + mpmath).
S = np.array([[1.0, 0.9], [0.9, 1.0]])
ALPHA = 0.5
A0 = np.diag([2 / 3, 2 / 3])
G0 = np.array([[-0.5, 0.9], [0.9, -0.5]])
B0 = np.array([[-2 / 9, 0.4], [0.4, -2 / 9]])
A1 = np.array([[2 / 3, -8 / 45], [-8 / 45, 2 / 3]])
F_A0 = 2.81093021621633
F_A1 = 2.74247414423372


@pytest.fixture
def worked():
    prob = Problem(S, ALPHA)
    w = spd_inverse(cholesky(A0))
    return prob, gradient(w, prob)


def test_init_diagonal_examples():
    np.testing.assert_allclose(init_diagonal(Problem(np.eye(2), 0.5)), np.diag([2 / 3, 2 / 3]))
    np.testing.assert_array_equal(init_diagonal(Problem(np.zeros((2, 2)), 1.0)), np.eye(2))
    np.testing.assert_array_equal(init_diagonal(Problem(np.diag([1.0, 3.0]), 1.0)), np.diag([0.5, 0.25]))


def test_init_diagonal_rejects_nonpositive():
    # Problem forbids this through its own checks; build one directly.
    prob = Problem(np.eye(2), 0.5)
    object.__setattr__(prob, "s", np.diag([-1.0, 1.0]))
    with pytest.raises(NonPositiveDiagonal):
        init_diagonal(prob)


def test_g_sign_approx_examples(worked):
    _, g = worked
    np.testing.assert_allclose(g, G0, atol=1e-15)
    np.testing.assert_array_equal(g_sign_approx(A0, g), [[1, -1], [-1, 1]])
    assert np.all(np.diag(g_sign_approx(np.eye(3), np.ones((3, 3)))) == 1)
    np.testing.assert_array_equal(g_sign_approx(np.zeros((2, 2)), np.zeros((2, 2))), np.zeros((2, 2)))


def test_c_matrix_examples():
    np.testing.assert_allclose(c_matrix(np.eye(2), 0.5), np.full((2, 2), 0.5))
    np.testing.assert_allclose(c_matrix(A0, 0.5), np.full((2, 2), 2 / 9))
    np.testing.assert_array_equal(c_matrix(np.array([[2.0, 1.0], [1.0, 3.0]]), 1.0), [[4, 7], [7, 9]])


def test_c_matrix_is_kronecker_diagonal():
    rng = np.random.default_rng(3)
    n = 4
    a = rng.standard_normal((n, n))
    a = a + a.T + 6 * np.eye(n)
    kron = np.kron(a, a)
    c = c_matrix(a, 1.0)
    for i in range(n):
        for j in range(n):
            # (i,j) and (j,i) are the same symmetric variable
            expected = kron[i * n + j, i * n + j] + (kron[i * n + j, j * n + i] if i != j else 0)
            assert c[i, j] == pytest.approx(expected)


def test_b_matrix_examples(worked):
    _, g = worked
    mask = free_set(A0, g, ALPHA)
    assert mask.all()
    gs = g_sign_approx(A0, g)
    c = c_matrix(A0, ALPHA)
    np.testing.assert_allclose(b_matrix(A0, g, gs, mask, c, ALPHA), B0, atol=1e-15)
    zero = np.zeros((2, 2))
    np.testing.assert_array_equal(b_matrix(np.eye(2), zero, zero, mask, c, ALPHA), zero)
    empty = np.zeros((2, 2), dtype=bool)
    np.testing.assert_array_equal(b_matrix(A0, g, gs, empty, c, ALPHA), zero)


def test_direction_examples():
    c = c_matrix(A0, ALPHA)
    d = direction(A0, B0, c, 1.0)
    np.testing.assert_allclose(d, [[0.0, -8 / 45], [-8 / 45, 0.0]], atol=1e-15)
    a = np.array([[2.0, 0.3], [0.3, 1.0]])
    c = c_matrix(a, 0.2)
    np.testing.assert_allclose(
        direction(a, np.zeros((2, 2)), c, 0.7),
        -a + np.sign(a) * np.maximum(np.abs(a) - 0.7 * c, 0),
    )
    # 1x1 optimum a = 1/(s+alpha)
    s, alpha = 1.7, 0.4
    a = np.array([[1 / (s + alpha)]])
    g = np.array([[s]]) - 1 / a
    b = b_matrix(a, g, g_sign_approx(a, g), np.ones((1, 1), bool), c_matrix(a, alpha), alpha)
    assert direction(a, b, c_matrix(a, alpha), 1.0)[0, 0] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("a, b, c, x", [(0, 2, 1, -1), (1, 0.5, 2, -1), (0, -3, 1, 2)])
def test_scalar_sign_solve_examples(a, b, c, x):
    assert scalar_sign_solve(a, b, c) == x


@given(
    a=st.floats(-100, 100),
    b=st.floats(-100, 100),
    c=st.floats(1e-6, 100),
)
def test_scalar_sign_solve_satisfies_inclusion(a, b, c):
    x = scalar_sign_solve(a, b, c)
    if x + a != 0:
        assert abs(x + b + c * np.sign(x + a)) <= 1e-12 * max(1.0, abs(a), abs(b), c)
    else:
        assert abs((a - b) / c) <= 1 + 1e-12


def test_linesearch_worked_instance(worked):
    prob, g = worked
    mask = free_set(A0, g, ALPHA)
    c = c_matrix(A0, ALPHA)
    b = b_matrix(A0, g, g_sign_approx(A0, g), mask, c, ALPHA)
    step = linesearch(A0, b, c, mask, prob, F_A0, SolverConfig())
    assert step.t == 1.0 and step.trials == 1
    np.testing.assert_allclose(step.a_next, A1, atol=1e-12)
    assert step.f_next == pytest.approx(F_A1, abs=1e-12)


def test_backtrack_stalls_on_zero_direction():
    prob = Problem(S, ALPHA)
    f0 = f_total(A0, prob, log_det(cholesky(A0)))
    assert backtrack(A0, lambda t: A0.copy(), prob, f0, SolverConfig()) is None


def test_linesearch_uses_fallback_after_floor():
    prob = Problem(S, ALPHA)
    seen = []

    def candidate(t):
        seen.append(t)
        # indefinite for every halving step, harmless for anything else
        bad = float(np.log2(t)).is_integer()
        return A0 + (10.0 if bad else 0.0) * np.array([[0.0, 1.0], [1.0, 0.0]])

    step = backtrack(A0, candidate, prob, F_A0 + 1.0, SolverConfig())
    assert step is not None
    # 1, 1/2, ..., 2^-13 then exactly one fallback at (0.9 / cond)^2 = 0.81
    assert len(seen) == 15
    assert seen[-1] == pytest.approx(0.81, rel=1e-6)


def test_first_iterate_of_worked_instance():
    r = solve_pista(Problem(S, ALPHA), cfg=SolverConfig(max_iter=1))
    np.testing.assert_allclose(r.estimate, A1, atol=1e-12)
    assert r.traces[0].f_total == pytest.approx(F_A1, abs=1e-12)
    assert r.termination is Termination.MAX_ITER


def test_worked_instance_matches_reference():
    ref = prox_grad_reference(S, ALPHA)
    r = solve_pista(Problem(S, ALPHA), cfg=SolverConfig(stop_rel=1e-9, max_iter=500))
    assert r.converged
    np.testing.assert_allclose(r.estimate, ref, atol=1e-4)


@pytest.mark.parametrize("s, alpha", [(0.0, 0.1), (1.0, 0.5), (3.7, 2.0)])
def test_one_by_one_converges_at_start(s, alpha):
    r = solve_pista(Problem(np.array([[s]]), alpha))
    assert r.iterations == 0 and r.termination is Termination.CRITERION
    assert r.estimate[0, 0] == 1 / (s + alpha)
    assert r.traces == []


def test_one_by_one_stalls_from_optimum():
    prob = Problem(np.array([[1.0]]), 0.5)
    r = solve_pista(prob, a0=np.array([[1 / 1.5]]), cfg=SolverConfig(stop_rel=1e-300))
    # the residual is round-off, no step can lower F, the iterate is kept
    assert r.termination is Termination.LINESEARCH_STALL
    assert r.iterations == 0 and r.estimate[0, 0] == 1 / 1.5


@pytest.mark.parametrize("seed", range(4))
def test_fixed_point_at_reference_optimum(seed):
    s = random_glasso_problem(6, 30, seed)
    alpha = 0.25
    a = prox_grad_reference(s, alpha, rel=1e-13)
    w = np.linalg.inv(a)
    g = s - 0.5 * (w + w.T)
    mask = free_set(a, g, alpha)
    c = c_matrix(a, alpha)
    b = b_matrix(a, g, g_sign_approx(a, g), mask, c, alpha)
    for t in (1e-3, 0.1, 1.0, 10.0):
        d = mask * direction(a, b, c, t)
        assert np.max(np.abs(d)) < 1e-8 * max(1.0, t)


@pytest.mark.parametrize("seed", range(5))
def test_monotone_pd_and_support(seed):
    s = random_glasso_problem(12, 24, seed)
    r = solve_pista(Problem(s, 0.15), cfg=SolverConfig(stop_rel=1e-8), keep_steps=True)
    fs = [tr.f_total for tr in r.traces]
    assert all(b < a for a, b in zip(fs, fs[1:]))
    assert cholesky(r.estimate) is not None
    for step, mask in zip(r.steps, r.masks):
        assert np.all(step[~mask] == 0.0)


def test_sign_stability_late_iterations():
    s = random_glasso_problem(10, 40, 7)
    alpha = 0.2
    r = solve_pista(Problem(s, alpha), cfg=SolverConfig(stop_rel=1e-10, max_iter=200), keep_steps=True)
    a = r.estimate
    w = np.linalg.inv(a)
    g = s - 0.5 * (w + w.T)
    mask = free_set(a, g, alpha)
    gs = g_sign_approx(a, g) * mask
    np.testing.assert_array_equal(gs, np.sign(a))


@pytest.mark.parametrize("seed", range(6))
def test_matches_reference_solver(seed):
    n = 8
    s = random_glasso_problem(n, 5 * n, seed)
    alpha = 0.2
    ref = prox_grad_reference(s, alpha)
    r = solve_pista(Problem(s, alpha), cfg=SolverConfig(stop_rel=1e-6, max_iter=500))
    assert r.converged
    assert np.max(np.abs(r.estimate - ref)) <= 1e-4
    assert abs(r.f_final - F_ref(ref, s, alpha)) <= 1e-6 * abs(F_ref(ref, s, alpha))
    sub = min_subgradient(r.estimate, s - np.linalg.inv(r.estimate), alpha)
    assert np.sum(np.abs(sub)) < 1e-6 * np.sum(np.abs(r.estimate)) * (1 + 1e-6)
