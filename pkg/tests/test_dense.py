from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inexact_krylov.dense import (
    EPS_M,
    SpectralEstimates,
    as_symmatrix,
    as_vector,
    cholesky,
    dual_norm,
    energy_norm,
    hessenberg_solve,
    random_orthogonal,
    solve_spd,
)
from inexact_krylov.errors import (
    DimensionMismatch,
    NegativeQuadraticForm,
    NotPositiveDefinite,
    SingularMatrix,
)


def spd(n, seed, kappa=1e3):
    q = random_orthogonal(n, seed)
    lam = np.logspace(0, -math.log10(kappa), n)
    return (q * lam) @ q.T


def test_eps_m_is_unit_roundoff():
    assert EPS_M == 2.0**-53


def test_as_vector_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        as_vector(np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        as_vector([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])


def test_as_symmatrix_mirrors_lower_triangle():
    a = as_symmatrix([[1.0, 99.0], [2.0, 3.0]])
    assert np.array_equal(a, [[1.0, 2.0], [2.0, 3.0]])
    with pytest.raises(DimensionMismatch):
        as_symmatrix(np.ones((2, 3)))


class TestCholesky:
    def test_identity(self):
        assert np.array_equal(cholesky(np.eye(3)).L, np.eye(3))

    def test_diagonal(self):
        assert np.allclose(cholesky(np.diag([4.0, 9.0])).L, np.diag([2.0, 3.0]), rtol=0, atol=1e-15)

    def test_reconstruction(self):
        a = spd(8, 1)
        L = cholesky(a).L
        assert np.linalg.norm(L @ L.T - a) <= 1e-13 * np.linalg.norm(a)
        assert np.allclose(L, np.tril(L))

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.diag([1.0, -1.0]))

    def test_semidefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestSolveSpd:
    def test_identity(self):
        assert np.array_equal(solve_spd(cholesky(np.eye(2)), [1.0, 2.0]), [1.0, 2.0])

    def test_diag(self):
        x = solve_spd(cholesky(np.diag([2.0, 8.0])), [2.0, 4.0])
        assert np.allclose(x, [1.0, 0.5], rtol=0, atol=1e-15)

    def test_known_solution(self):
        a = spd(8, 1)
        x = solve_spd(cholesky(a), a @ np.ones(8))
        assert np.max(np.abs(x - 1.0)) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_spd(cholesky(np.eye(2)), [1.0, 2.0, 3.0])


class TestNorms:
    def test_dual_identity(self):
        v = np.array([3.0, -4.0])
        assert dual_norm(cholesky(np.eye(2)), v) == pytest.approx(5.0, abs=1e-15)

    def test_dual_diag(self):
        # v^T A^-1 v = 4/2 + 16/8 = 4
        assert dual_norm(cholesky(np.diag([2.0, 8.0])), [2.0, 4.0]) == pytest.approx(2.0, rel=1e-15)

    def test_dual_zero(self):
        assert dual_norm(cholesky(np.eye(3)), np.zeros(3)) == 0.0

    def test_energy(self):
        assert energy_norm(np.eye(2), [3.0, 4.0]) == pytest.approx(5.0, abs=1e-15)
        assert energy_norm(np.array([[4.0]]), [1.0]) == 2.0

    def test_energy_negative_form(self):
        with pytest.raises(NegativeQuadraticForm):
            energy_norm(np.diag([-1.0, 1.0]), [1.0, 0.0])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_norms_match_eigendecomposition(self, seed):
        a = spd(8, seed, kappa=1e4)
        v = np.random.default_rng(seed).standard_normal(8)
        lam, q = np.linalg.eigh(a)
        c = q.T @ v
        assert energy_norm(a, v) == pytest.approx(math.sqrt(np.sum(lam * c**2)), rel=1e-10)
        assert dual_norm(cholesky(a), v) == pytest.approx(math.sqrt(np.sum(c**2 / lam)), rel=1e-10)

    def test_dual_norm_of_residual_is_objective_gap(self):
        a = spd(8, 2)
        b = np.random.default_rng(0).standard_normal(8)
        ch = cholesky(a)
        xs = np.linalg.solve(a, b)
        q = lambda x: 0.5 * x @ a @ x - b @ x  # noqa: E731
        for x in np.random.default_rng(1).standard_normal((10, 8)):
            lhs = 0.5 * dual_norm(ch, a @ x - b) ** 2
            assert abs(lhs - (q(x) - q(xs))) <= 1e-10 * abs(q(xs))


class TestHessenberg:
    def test_identity(self):
        assert np.array_equal(hessenberg_solve(np.eye(3), [2.0, 0.0, 0.0]), [2.0, 0.0, 0.0])

    def test_two_by_two(self):
        y = hessenberg_solve(np.array([[2.0, 1.0], [1.0, 1.0]]), [1.0, 0.0])
        assert np.allclose(y, [1.0, -1.0], rtol=0, atol=1e-15)

    def test_upper_triangular_matches_full_solve(self):
        u = np.triu(np.random.default_rng(3).standard_normal((6, 6))) + 3 * np.eye(6)
        rhs = np.arange(1.0, 7.0)
        assert np.allclose(hessenberg_solve(u, rhs), np.linalg.solve(u, rhs), rtol=1e-13, atol=0)

    def test_needs_pivoting(self):
        h = np.array([[0.0, 1.0], [1.0, 1.0]])
        assert np.allclose(hessenberg_solve(h, [1.0, 2.0]), [1.0, 1.0], rtol=0, atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 10_000))
    def test_random_against_numpy(self, k, seed):
        rng = np.random.default_rng(seed)
        h = np.triu(rng.standard_normal((k, k)), -1) + 2 * np.eye(k)
        rhs = rng.standard_normal(k)
        ref = np.linalg.solve(h, rhs)
        y = hessenberg_solve(h, rhs)
        assert np.linalg.norm(h @ y - rhs) <= 1e-10 * np.linalg.cond(h) * np.linalg.norm(rhs)
        assert np.allclose(y, ref, rtol=1e-6, atol=1e-8)

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            hessenberg_solve(np.array([[1.0, 1.0], [0.0, 0.0]]), [1.0, 1.0])

    def test_not_hessenberg(self):
        with pytest.raises(ValueError):
            hessenberg_solve(np.ones((3, 3)), np.ones(3))


class TestRandomOrthogonal:
    def test_order_one(self):
        assert abs(random_orthogonal(1, 0)[0, 0]) == 1.0

    def test_orthogonality(self):
        q = random_orthogonal(8, 1)
        assert np.linalg.norm(q.T @ q - np.eye(8)) <= 1e-14

    def test_deterministic(self):
        assert np.array_equal(random_orthogonal(8, 5), random_orthogonal(8, 5))
        assert not np.array_equal(random_orthogonal(8, 5), random_orthogonal(8, 6))


def test_spectral_estimates_validation():
    est = SpectralEstimates(0.1, 10.0, 5.0, 3)
    assert est.kappa == pytest.approx(100.0)
    with pytest.raises(ValueError):
        SpectralEstimates(2.0, 1.0, 1.0, 2)
    with pytest.raises(ValueError):
        SpectralEstimates(0.0, 1.0, 1.0, 2)
