from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inexact_krylov.budget import (
    BudgetState,
    budget_init,
    budget_update,
    k_max_spectral,
    phi_hat_cg,
    phi_hat_fom,
)
from inexact_krylov.dense import SpectralEstimates
from inexact_krylov.errors import DegenerateResidual, InvalidAccuracy


def est(kappa):
    return SpectralEstimates(1.0 / kappa, 1.0, 1.0, 10)


class TestKmaxSpectral:
    def test_kappa_1e2(self):
        rho = 9.0 / 11.0
        assert math.log(1e-3) / math.log(rho) == pytest.approx(34.42, abs=0.01)
        assert k_max_spectral(1e-3, est(1e2)) == 35

    def test_kappa_1e4(self):
        rho = 99.0 / 101.0
        assert math.log(1e-3) / math.log(rho) == pytest.approx(345.4, abs=0.1)
        assert k_max_spectral(1e-3, est(1e4)) == 346

    def test_kappa_one(self):
        assert k_max_spectral(1e-3, est(1.0)) == 1

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
    def test_invalid_eps(self, eps):
        with pytest.raises(InvalidAccuracy):
            k_max_spectral(eps, est(10.0))

    @given(st.floats(1.01, 1e8), st.floats(1e-9, 0.5))
    def test_monotone_in_kappa(self, kappa, eps):
        assert k_max_spectral(eps, est(kappa)) <= k_max_spectral(eps, est(kappa * 2))


class TestInit:
    def test_default_budget(self):
        assert budget_init(3000, 35) == BudgetState(k_max=35, phi_current=35.0, Phi_remaining=1.0)

    def test_min(self):
        assert budget_init(1, 100).k_max == 1
        assert budget_init(10, 10).k_max == 10

    def test_invalid(self):
        with pytest.raises(ValueError):
            budget_init(0, 5)


class TestPhiHat:
    def test_fom_unit(self):
        assert phi_hat_fom(1, 1, 1, 1, 1, 1) == 1

    def test_fom_plugged(self):
        assert phi_hat_fom(0.0158, 1.0, 1e-3, 1.0, 10.0, 0.1) == pytest.approx(15.8, rel=1e-12)

    def test_fom_homogeneous(self):
        a = phi_hat_fom(0.02, 1.3, 1e-3, 0.7, 5.0, 0.2)
        assert phi_hat_fom(0.02, 1.3, 5e-4, 0.7, 5.0, 0.2) == pytest.approx(2 * a, rel=1e-14)

    def test_cg_plugged(self):
        assert phi_hat_cg(0.0158, 1.0, 0.5, 1.0, 0.1) == pytest.approx(1.58, rel=1e-12)

    def test_cg_limit(self):
        assert phi_hat_cg(0.0158, 1.0, 1 - 1e-12, 1.0, 0.1) < 1e-9

    def test_cg_homogeneous(self):
        a = phi_hat_cg(0.02, 1.3, 0.3, 0.7, 0.2)
        assert phi_hat_cg(0.02, 1.3, 0.3, 0.7, 0.4) == pytest.approx(a / 4, rel=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateResidual):
            phi_hat_fom(0.1, 1, 0.1, 1, 1, 0.0)
        with pytest.raises(DegenerateResidual):
            phi_hat_cg(0.1, 1, 0.1, 1, 0.0)


class TestUpdate:
    def test_steady_state(self):
        s = budget_update(budget_init(10, 10), 10.0)
        assert s.Phi_remaining == pytest.approx(0.9, rel=1e-15)
        assert s.phi_current == pytest.approx(10.0, rel=1e-14)
        assert s.iterations_used == 1

    def test_no_spend_grows_allowance(self):
        s = budget_update(budget_init(10, 10), 1e300)
        assert s.Phi_remaining == 1.0
        assert s.phi_current == pytest.approx(9.0)

    def test_freeze_when_exhausted(self):
        s = budget_update(budget_init(10, 10), 0.5)
        assert s.Phi_remaining == -1.0
        assert s.phi_current == 10.0
        assert budget_update(s, 3.0).phi_current == 10.0

    def test_freeze_after_kmax(self):
        s = budget_init(2, 2)
        s = budget_update(s, 4.0)
        s = budget_update(s, 4.0)
        phi = s.phi_current
        assert budget_update(s, 100.0).phi_current == phi

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            budget_update(budget_init(3, 3), 0.0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 60), st.lists(st.floats(1.0, 1e6), min_size=1, max_size=60))
    def test_spending_never_exceeds_one(self, k_max, slack):
        # an oracle that is at least as accurate as requested gives phi_hat >= phi
        s = budget_init(k_max, k_max)
        spent = 0.0
        for j, f in enumerate(slack[:k_max]):
            phi_hat = s.phi_current * f
            spent += 1.0 / phi_hat
            s = budget_update(s, phi_hat)
            assert spent <= 1.0 + 1e-12
            assert s.spent == pytest.approx(spent, rel=1e-12)
            if j + 1 < k_max:
                assert s.Phi_remaining > 0.0
