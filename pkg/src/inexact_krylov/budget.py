"""Inaccuracy-budget bookkeeping.

The per-iteration weights ``phi_j`` must satisfy ``sum 1/phi_j <= 1`` over
the iterations preceding termination.  Starting from ``phi = k_max`` (the
expected iteration count), every product that turned out more accurate than
requested frees budget, which is redistributed evenly over the iterations
left before ``k_max``.  Only the running pair ``(phi, Phi)`` is stored, with
``Phi = 1 - sum_p 1/phi_hat_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .dense import SpectralEstimates
from .errors import DegenerateResidual, InvalidAccuracy


@dataclass(frozen=True)
class BudgetState:
    k_max: int
    phi_current: float
    Phi_remaining: float = 1.0
    iterations_used: int = 0
    spent: float = 0.0  # running sum of 1/phi_hat, for audits


def k_max_spectral(eps: float, est: SpectralEstimates) -> int:
    """Iterations a CG-like method needs to reduce the error by ``eps``.

    ``ceil(log(eps) / log(rho))`` with ``rho = (sqrt(kappa)-1)/(sqrt(kappa)+1)``.
    """
    if not (0.0 < eps < 1.0):
        raise InvalidAccuracy(f"eps must lie in (0, 1), got {eps}")
    kappa = est.lambda_max_est / est.lambda_min_est
    if kappa <= 1.0 + 1e-12:
        return 1
    s = math.sqrt(kappa)
    rho = (s - 1.0) / (s + 1.0)
    return max(1, math.ceil(math.log(eps) / math.log(rho)))


def budget_init(k_max_user: int, k_max_spec: int) -> BudgetState:
    if k_max_user < 1 or k_max_spec < 1:
        raise ValueError("iteration bounds must be >= 1")
    k = min(k_max_user, k_max_spec)
    return BudgetState(k_max=k, phi_current=float(k))


def phi_hat_fom(eps_pi, b_dual_norm_est, omega_hat, v_A_norm_est, Hinv_norm_est, r_prev_2norm) -> float:
    """Weight for which the FOM accuracy formula returns exactly ``omega_hat``."""
    if r_prev_2norm == 0.0:
        raise DegenerateResidual("previous residual is zero")
    return eps_pi * b_dual_norm_est / (omega_hat * v_A_norm_est * Hinv_norm_est * r_prev_2norm)


def phi_hat_cg(eps_pi, b_dual_norm_est, omega_hat, p_A_norm_est, r_2norm) -> float:
    """Weight for which the CG accuracy formula returns exactly ``omega_hat``."""
    if r_2norm == 0.0:
        raise DegenerateResidual("residual is zero")
    return (1.0 - omega_hat) * eps_pi * b_dual_norm_est * p_A_norm_est / (omega_hat * r_2norm**2)


def budget_update(state: BudgetState, phi_hat: float) -> BudgetState:
    """Charge ``1/phi_hat`` and respread what is left over the remaining iterations.

    Once ``k_max`` iterations are used, or the budget is exhausted, ``phi``
    stays frozen at its last value.
    """
    if not phi_hat > 0.0:
        raise ValueError("phi_hat must be positive")
    Phi = state.Phi_remaining - 1.0 / phi_hat
    used = state.iterations_used + 1
    phi = state.phi_current
    if used < state.k_max and Phi > 0.0:
        phi = (state.k_max - used) / Phi
    return replace(
        state,
        phi_current=phi,
        Phi_remaining=Phi,
        iterations_used=used,
        spent=state.spent + 1.0 / phi_hat,
    )
