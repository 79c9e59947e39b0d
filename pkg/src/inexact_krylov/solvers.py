"""FOM and CG with inexact matrix-vector products.

Both methods start from ``x_0 = 0`` and run in one of three modes:

``EXACT``
    Full-accuracy products; stops when ``||r_k||_{A^-1} <= 1/2 sqrt(eps) ||b||_{A^-1}``.
``THEORETICAL``
    Per-product accuracy from the primal-dual bounds, which need
    ``||b||_{A^-1}``, ``||v_j||_A`` or ``||p_j||_A``.  These are computed from
    the problem's exact data, so this mode is a diagnostic and not a
    practical method.  Same stopping rule as ``EXACT``.
``PRACTICAL``
    Accuracy from computable estimates (eigenvalue estimates, trace and the
    running objective value); stops when the objective has stabilized over
    the last ``d`` iterations.

The accuracy of iteration ``j`` is scaled by a weight ``phi_j``; with the
managed policy the weights come from :mod:`inexact_krylov.budget`.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .budget import (
    BudgetState,
    budget_init,
    budget_update,
    k_max_spectral,
    phi_hat_cg,
    phi_hat_fom,
)
from .dense import EPS_M, SpectralEstimates, dual_norm, energy_norm, hessenberg_solve
from .errors import DegenerateResidual, IndefiniteCurvature
from .oracle import AccuracyRequest, NormMode
from .problems import QuadraticProblem


class Mode(enum.Enum):
    EXACT = "exact"
    THEORETICAL = "theoretical"
    PRACTICAL = "practical"


class Method(enum.Enum):
    FOM = "FOM"
    CG = "CG"


class PhiPolicy(enum.Enum):
    MANAGED = "managed"
    CONSTANT_N = "constant"


class Termination(enum.Enum):
    DELAY_TEST = "DelayTest"
    DUAL_NORM_TEST = "DualNormTest"
    RESIDUAL_SMALL = "ResidualSmall"
    MAX_ITERATIONS = "MaxIterations"
    BREAKDOWN = "Breakdown"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one solve.

    ``first_estimate`` selects how ``||b||_{A^-1}`` is guessed before any
    objective value is known: ``"dual"`` uses ``||b||_2 / sqrt(lambda_max)``,
    ``"value"`` replaces ``|q|`` by ``||b||_2 lambda_max``.
    ``record_vectors`` keeps iterates, residuals and injected errors in the
    trace (needed by :func:`residual_gap_audit`).
    """

    eps: float = 1e-3
    delay_d: int = 10
    k_max_user: int | None = None
    mode: Mode = Mode.PRACTICAL
    method: Method = Method.CG
    reorth: bool = False
    phi_policy: PhiPolicy = PhiPolicy.MANAGED
    first_estimate: str = "dual"
    seed: int = 0
    record_vectors: bool = False

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.delay_d < 1:
            raise ValueError("delay must be >= 1")
        if self.k_max_user is not None and self.k_max_user < 1:
            raise ValueError("k_max_user must be >= 1")
        if self.first_estimate not in ("dual", "value"):
            raise ValueError(f"unknown first_estimate {self.first_estimate!r}")

    @property
    def eps_pi(self) -> float:
        return 0.5 * math.sqrt(self.eps)


@dataclass
class IterationRecord:
    k: int
    omega_requested: float
    omega_hat: float
    cost: float
    q_k: float
    r_2norm: float
    r_dual_norm: float | None
    phi_k: float
    phi_hat: float
    alpha: float | None = None
    iterate: np.ndarray | None = None
    residual: np.ndarray | None = None
    injected_error: np.ndarray | None = None
    correction: np.ndarray | None = None


@dataclass
class SolveReport:
    x_final: np.ndarray
    n_it: int
    total_cost: float
    termination_reason: Termination
    trace: list[IterationRecord]
    r_final: np.ndarray
    q_final: float
    k_max: int
    basis: np.ndarray | None = None
    hessenberg: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def phi_hat_sum(self) -> float:
        """``sum 1/phi_hat`` over all products of the run."""
        return sum(1.0 / rec.phi_hat for rec in self.trace)


# --------------------------------------------------------------------------
# accuracy formulas

def omega_fom_theoretical(eps_pi, b_dual, v_A_norm, Hinv_est, r_prev_2, phi_j) -> float:
    if r_prev_2 == 0.0:
        raise DegenerateResidual("previous residual is zero")
    return min(1.0, eps_pi * b_dual / (phi_j * v_A_norm * Hinv_est * r_prev_2))


def omega_cg_theoretical(eps_pi, b_dual, p_A_norm, r_2, phi_next) -> float:
    if r_2 == 0.0:
        raise DegenerateResidual("residual is zero")
    a = eps_pi * b_dual * p_A_norm
    return a / (phi_next * r_2**2 + a)


def omega_fom_practical(eps_pi, q_j_abs, est: SpectralEstimates, r_prev_2, v_2, phi_j) -> float:
    """Bound on ``||E_j||_2 / lambda_min`` for iteration ``j`` of FOM."""
    if r_prev_2 == 0.0:
        raise DegenerateResidual("previous residual is zero")
    num = eps_pi * math.sqrt(est.n) * math.sqrt(2.0 * q_j_abs) * est.lambda_min_est
    den = phi_j * r_prev_2 * math.sqrt(est.trace) * v_2
    return min(1.0, num / den)


def omega_cg_practical(eps_pi, q_j_abs, est: SpectralEstimates, r_2, p_2, phi_next) -> float:
    """Bound on ``||E_j||_2 / lambda_min`` for iteration ``j`` of CG."""
    if r_2 == 0.0:
        raise DegenerateResidual("residual is zero")
    a = eps_pi * math.sqrt(2.0 * q_j_abs) * math.sqrt(est.trace) * p_2
    return a / (math.sqrt(est.n) * phi_next * r_2**2 + a)


# --------------------------------------------------------------------------
# shared plumbing

def _first_q_abs(b_norm: float, est: SpectralEstimates, rule: str) -> float:
    # |q| stand-in while x = 0, chosen so that sqrt(2|q|) estimates ||b||_{A^-1}
    if rule == "dual":
        return 0.5 * b_norm**2 / est.lambda_max_est
    return b_norm * est.lambda_max_est


class _Setup:
    """Quantities common to both methods, resolved once per solve."""

    def __init__(self, problem, oracle, budget, config, estimates):
        self.problem = problem
        self.oracle = oracle
        self.config = config
        self.n = problem.n
        self.b = problem.b
        self.b_norm = float(np.linalg.norm(problem.b))
        if estimates is None:
            estimates = getattr(oracle, "spectral", None) or problem.spectral_true
        self.est = estimates
        self.k_max_user = config.k_max_user or 3 * self.n
        if budget is None:
            kspec = k_max_spectral(config.eps, estimates)
            budget = budget_init(self.k_max_user, kspec)
        self.budget = budget
        self.mode = config.mode
        self.eps_pi = config.eps_pi
        self.norm_mode = (
            NormMode.PRIMAL_DUAL if self.mode is Mode.THEORETICAL else NormMode.TWO_NORM_RELATIVE
        )
        if self.mode is not Mode.PRACTICAL:
            self.b_dual = dual_norm(problem.chol, problem.b)
            self.dual_target = self.eps_pi * self.b_dual
        self.Hinv = 1.0 / problem.spectral_true.lambda_min_est
        self.q_hist = deque([0.0], maxlen=config.delay_d + 1)

    def phi(self) -> float:
        if self.config.phi_policy is PhiPolicy.CONSTANT_N:
            return float(self.n)
        return self.budget.phi_current

    def q_abs(self, it: int, q_last: float) -> float:
        if it == 0:
            return _first_q_abs(self.b_norm, self.est, self.config.first_estimate)
        return abs(q_last)

    def request(self, omega: float) -> AccuracyRequest:
        return AccuracyRequest(omega, self.norm_mode)

    def delay_test(self, m: int, q: float) -> bool:
        """Push ``q_m`` and test ``q_{m-d} - q_m <= eps/4 |q_m|`` (only for ``m > d``)."""
        self.q_hist.append(q)
        if m <= self.config.delay_d:
            return False
        return self.q_hist[0] - q <= 0.25 * self.config.eps * abs(q)

    def spend(self, phi_hat: float) -> None:
        if self.config.phi_policy is PhiPolicy.MANAGED:
            self.budget = budget_update(self.budget, phi_hat)


# --------------------------------------------------------------------------
# FOM

def solve_fom(
    problem: QuadraticProblem,
    oracle,
    budget: BudgetState | None = None,
    config: SolverConfig | None = None,
    *,
    estimates: SpectralEstimates | None = None,
) -> SolveReport:
    """Full orthogonalization method with inexact products.

    Arnoldi with modified Gram-Schmidt; ``y_k = H_k^{-1} (beta e_1)`` is
    recomputed every iteration and ``q_k = -1/2 z^T y_k`` with
    ``z_j = v_j^T b``.  The iterate ``x_k = V_k y_k`` is only formed at exit
    (or every iteration when ``config.record_vectors`` is set).

    ``estimates`` defaults to the oracle's estimates, then to the exact
    spectrum of the problem.  ``budget`` defaults to
    ``budget_init(k_max_user, k_max_spectral(eps, estimates))``.
    """
    config = config or SolverConfig(method=Method.FOM)
    s = _Setup(problem, oracle, budget, config, estimates)
    n, b, beta = s.n, s.b, s.b_norm
    kmax = s.k_max_user

    cap = min(kmax, n) + 1
    V = np.zeros((n, cap))
    H = np.zeros((cap + 1, cap))
    z = np.zeros(cap)
    trace: list[IterationRecord] = []

    if beta == 0.0:
        return SolveReport(np.zeros(n), 0, 0.0, Termination.RESIDUAL_SMALL, trace,
                           -b.copy(), 0.0, s.budget.k_max)

    V[:, 0] = b / beta
    z[0] = beta
    y = np.zeros(0)
    w = np.zeros(n)
    r_prev = beta
    q = 0.0
    reason = Termination.MAX_ITERATIONS

    def residual(k, y, w):
        # r_k = V_{k+1} H~_k y_k - b, with h_{k+1,k} v_{k+1} = w
        return V[:, :k] @ (H[:k, :k] @ y) + w * y[-1] - b

    k = 0
    for k in range(1, kmax + 1):
        if r_prev <= EPS_M * beta:
            k -= 1
            reason = Termination.RESIDUAL_SMALL
            break
        if k >= V.shape[1]:
            V = np.hstack([V, np.zeros((n, V.shape[1]))])
            H = np.pad(H, ((0, H.shape[0]), (0, H.shape[1])))
            z = np.concatenate([z, np.zeros(z.shape[0])])
        v = V[:, k - 1]
        phi = s.phi()

        if s.mode is Mode.EXACT:
            omega = 0.0
        elif s.mode is Mode.THEORETICAL:
            v_a = energy_norm(problem.A, v)
            omega = omega_fom_theoretical(s.eps_pi, s.b_dual, v_a, s.Hinv, r_prev, phi)
        else:
            v_2 = float(np.linalg.norm(v))
            q_abs = s.q_abs(k - 1, q)
            omega = omega_fom_practical(s.eps_pi, q_abs, s.est, r_prev, v_2, phi)

        out = oracle.apply(v, s.request(omega))
        w = out.product.copy()
        w_norm = float(np.linalg.norm(w))
        for i in range(k):
            H[i, k - 1] = V[:, i] @ w
            w -= H[i, k - 1] * V[:, i]
        h_next = float(np.linalg.norm(w))
        H[k, k - 1] = h_next
        if h_next > 0.0:
            V[:, k] = w / h_next

        y = hessenberg_solve(H[:k, :k], np.eye(k, 1).ravel() * beta)
        q = float(-0.5 * (z[:k] @ y))
        r_norm = h_next * abs(y[-1])

        r_dual = None
        done = False
        if s.mode is Mode.PRACTICAL:
            done = s.delay_test(k, q)
            if done:
                reason = Termination.DELAY_TEST
        else:
            r_dual = dual_norm(problem.chol, residual(k, y, w))
            if r_dual <= s.dual_target:
                done = True
                reason = Termination.DUAL_NORM_TEST

        if s.mode is Mode.EXACT:
            phi_hat = math.inf
        elif s.mode is Mode.THEORETICAL:
            phi_hat = phi_hat_fom(s.eps_pi, s.b_dual, out.omega_hat, v_a, s.Hinv, r_prev)
        else:
            phi_hat = phi_hat_fom(
                s.eps_pi,
                math.sqrt(2.0 * q_abs),
                out.omega_hat,
                math.sqrt(s.est.trace / n) * v_2,
                1.0 / s.est.lambda_min_est,
                r_prev,
            )

        rec = IterationRecord(k, omega, out.omega_hat, out.cost, q, r_norm, r_dual, phi, phi_hat)
        if config.record_vectors:
            rec.iterate = V[:, :k] @ y
            rec.residual = residual(k, y, w)
            rec.injected_error = out.injected_error
        trace.append(rec)

        if done:
            break
        s.spend(phi_hat)
        # no room for another orthonormal vector once k = n
        if h_next <= n * EPS_M * w_norm or k >= n:
            reason = Termination.BREAKDOWN
            break
        z[k] = V[:, k] @ b
        r_prev = r_norm

    if k == 0:
        x = np.zeros(n)
        r_final = -b.copy()
    else:
        x = V[:, :k] @ y
        r_final = residual(k, y, w)
    total = sum(rec.cost for rec in trace)
    return SolveReport(
        x_final=x,
        n_it=len(trace),
        total_cost=total,
        termination_reason=reason,
        trace=trace,
        r_final=r_final,
        q_final=q,
        k_max=s.budget.k_max,
        basis=V[:, : k + 1].copy(),
        hessenberg=H[: k + 1, :k].copy(),
        extra={"z": z[:k].copy(), "y": y.copy()},
    )


# --------------------------------------------------------------------------
# CG

def solve_cg(
    problem: QuadraticProblem,
    oracle,
    budget: BudgetState | None = None,
    config: SolverConfig | None = None,
    *,
    estimates: SpectralEstimates | None = None,
) -> SolveReport:
    """Conjugate gradients with inexact products and optional reorthogonalization.

    Starts from ``x_0 = 0``, ``r_0 = -b``, ``p_0 = b``.  With
    ``config.reorth`` every new residual is orthogonalized (modified
    Gram-Schmidt) against all previous normalized residuals, ``r_0``
    included.  ``q_{k+1} = -1/2 b^T x_{k+1}``.

    Raises
    ------
    IndefiniteCurvature
        If ``p_k^T (A + E_k) p_k <= 0``.
    """
    config = config or SolverConfig(method=Method.CG)
    s = _Setup(problem, oracle, budget, config, estimates)
    n, b, b_norm = s.n, s.b, s.b_norm
    kmax = s.k_max_user

    x = np.zeros(n)
    r = -b.copy()
    p = b.copy()
    beta = b_norm
    q = 0.0
    U = [b / b_norm] if (config.reorth and b_norm > 0.0) else []
    trace: list[IterationRecord] = []
    reason = Termination.MAX_ITERATIONS

    for k in range(kmax):
        if beta <= EPS_M * b_norm or beta == 0.0:
            reason = Termination.RESIDUAL_SMALL
            break
        phi = s.phi()

        if s.mode is Mode.EXACT:
            omega = 0.0
        elif s.mode is Mode.THEORETICAL:
            p_a = energy_norm(problem.A, p)
            omega = omega_cg_theoretical(s.eps_pi, s.b_dual, p_a, beta, phi)
        else:
            p_2 = float(np.linalg.norm(p))
            q_abs = s.q_abs(k, q)
            omega = omega_cg_practical(s.eps_pi, q_abs, s.est, beta, p_2, phi)

        out = oracle.apply(p, s.request(omega))
        c = out.product
        curv = float(p @ c)
        if curv <= 0.0:
            raise IndefiniteCurvature(f"p^T c = {curv:.3e} at iteration {k}")
        alpha = beta**2 / curv
        x = x + alpha * p
        q = float(-0.5 * (b @ x))

        r_new = r + alpha * c
        corr = None
        if config.reorth:
            r_raw = r_new.copy()
            for u in U:
                r_new -= (u @ r_new) * u
            corr = r_raw - r_new
        beta_new = float(np.linalg.norm(r_new))
        if config.reorth and beta_new > 0.0:
            U.append(r_new / beta_new)

        r_dual = None
        done = False
        if s.mode is Mode.PRACTICAL:
            done = s.delay_test(k + 1, q)
            if done:
                reason = Termination.DELAY_TEST
        else:
            r_dual = dual_norm(problem.chol, r_new)
            if r_dual <= s.dual_target:
                done = True
                reason = Termination.DUAL_NORM_TEST

        if s.mode is Mode.EXACT:
            phi_hat = math.inf
        elif s.mode is Mode.THEORETICAL:
            phi_hat = phi_hat_cg(s.eps_pi, s.b_dual, out.omega_hat, p_a, beta)
        else:
            phi_hat = phi_hat_cg(
                s.eps_pi,
                math.sqrt(2.0 * q_abs),
                out.omega_hat,
                math.sqrt(s.est.trace / n) * p_2,
                beta,
            )

        rec = IterationRecord(
            k + 1, omega, out.omega_hat, out.cost, q, beta_new, r_dual, phi, phi_hat, alpha
        )
        if config.record_vectors:
            rec.iterate = x.copy()
            rec.residual = r_new.copy()
            rec.injected_error = out.injected_error
            rec.correction = corr
        trace.append(rec)

        r = r_new
        if done:
            break
        s.spend(phi_hat)
        p = -r_new + (beta_new / beta) ** 2 * p
        beta = beta_new

    total = sum(rec.cost for rec in trace)
    return SolveReport(
        x_final=x,
        n_it=len(trace),
        total_cost=total,
        termination_reason=reason,
        trace=trace,
        r_final=r,
        q_final=q,
        k_max=s.budget.k_max,
    )


def solve(problem, oracle, budget=None, config: SolverConfig | None = None, **kw) -> SolveReport:
    """Dispatch on ``config.method``."""
    config = config or SolverConfig()
    fn = solve_fom if config.method is Method.FOM else solve_cg
    return fn(problem, oracle, budget, config, **kw)


def residual_gap_audit(problem: QuadraticProblem, trace, k: int | None = None) -> np.ndarray:
    """Deviation from the residual-gap identity of inexact CG after ``k`` iterations.

    Without reorthogonalization ``r(x_k) - r_k = -sum_j alpha_j E_j p_j``;
    residual reorthogonalization adds the removed components back in.  The
    returned vector is the difference of both sides and should be at
    rounding level.  ``trace`` must come from a run with
    ``record_vectors=True``.
    """
    if k is None:
        k = len(trace)
    if k == 0:
        return np.zeros(problem.n)
    predicted = np.zeros(problem.n)
    for rec in trace[:k]:
        if rec.injected_error is None or rec.alpha is None:
            raise ValueError("trace lacks recorded vectors; rerun with record_vectors=True")
        predicted -= rec.alpha * rec.injected_error
        if rec.correction is not None:
            predicted += rec.correction
    last = trace[k - 1]
    gap = (problem.A @ last.iterate - problem.b) - last.residual
    return gap - predicted
