from __future__ import annotations

import numpy as np
import pytest

from inexact_krylov.errors import DimensionMismatch
from inexact_krylov.metrics import EvalResult, evaluate, true_residual
from inexact_krylov.problems import SpectrumSpec, gen_synthetic


def test_at_solution(small_problem):
    p = small_problem
    ev = evaluate(p, p.x_star, np.zeros(p.n), p.q_star)
    assert ev.r_res_gap <= 1e-20
    assert abs(ev.r_sol_err) <= 1e-12
    assert ev.r_val_err <= 1e-12


def test_at_origin(small_problem):
    p = small_problem
    ev = evaluate(p, np.zeros(p.n), -p.b, 0.0)
    assert ev == EvalResult(0.0, 1.0, 0.0)


def test_consistent_residual_has_no_gap(small_problem):
    p = small_problem
    for x in np.random.default_rng(2).standard_normal((5, p.n)):
        ev = evaluate(p, x, true_residual(p, x), p.q(x))
        assert ev.r_res_gap == 0.0 and ev.r_val_err == 0.0


def test_gap_value(small_problem):
    # shifting the recurred residual by d gives gap 1/2 d^T A^-1 d / |q*|
    p = small_problem
    d = np.random.default_rng(4).standard_normal(p.n) * 1e-3
    x = p.x_star
    ev = evaluate(p, x, true_residual(p, x) - d, p.q_star)
    ref = 0.5 * d @ np.linalg.solve(p.A, d) / abs(p.q_star)
    assert ev.r_res_gap == pytest.approx(ref, rel=1e-8)


def test_true_residual(small_problem):
    p = small_problem
    assert np.linalg.norm(true_residual(p, p.x_star)) <= 1e-10 * np.linalg.norm(p.b)
    assert np.array_equal(true_residual(p, np.zeros(p.n)), -p.b)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, p.n))
    assert np.allclose(true_residual(p, x + y) - true_residual(p, x), p.A @ y, rtol=0, atol=1e-12)


def test_convexity_and_gap_identity():
    # 1/2 ||r(x)||^2_{A^-1} = q(x) - q(x*) for 100 random pairs
    rng = np.random.default_rng(8)
    for i in range(20):
        p = gen_synthetic(SpectrumSpec(12, 10.0 ** rng.uniform(0, 4)), i)
        for x in rng.standard_normal((5, p.n)) * 10.0 ** rng.uniform(-3, 1):
            ev = evaluate(p, x, np.zeros(p.n), 0.0)
            assert ev.r_sol_err >= -1e-12
            # with r_recurred = 0 the gap term is the full dual norm of r(x)
            assert abs(ev.r_res_gap - ev.r_sol_err) <= 1e-10


def test_dimension_mismatch(small_problem):
    with pytest.raises(DimensionMismatch):
        evaluate(small_problem, np.zeros(3), np.zeros(3), 0.0)
