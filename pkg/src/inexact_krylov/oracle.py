"""Inexact matrix-vector products with a requested accuracy and a cost charge.

An oracle answers ``(A + E) p`` for a requested bound ``omega`` on the size
of ``E`` and reports the bound ``omega_hat <= omega`` it actually honoured.
Two norms are supported for that bound:

``TWO_NORM_RELATIVE``
    ``||E||_2 / lambda_min <= omega``, with ``lambda_min`` the estimate the
    solver was given (it has to live with its own misinformation).
``PRIMAL_DUAL``
    ``||E||_{A^-1,A} <= omega``; needs the Cholesky factor of ``A``.

The error is realized as a single vector ``e = E p`` of random direction
whose norm saturates the bound, which keeps every run auditable: the
injected vector is returned with the product.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dense import EPS_M, CholeskyFactor, SpectralEstimates, as_vector, dual_norm
from .errors import DimensionMismatch, OutOfRange, ZeroDirection


class NormMode(enum.Enum):
    TWO_NORM_RELATIVE = "two-norm-relative"
    PRIMAL_DUAL = "primal-dual"


@dataclass(frozen=True)
class AccuracyRequest:
    omega: float
    norm_mode: NormMode = NormMode.TWO_NORM_RELATIVE

    def __post_init__(self):
        if not (0.0 <= self.omega <= 1.0):
            raise OutOfRange(f"requested accuracy {self.omega} not in [0, 1]")


class PrecisionLevel(enum.Enum):
    """Simulated arithmetic precisions: (relative accuracy, cost)."""

    DOUBLE = (EPS_M, 1.0)
    SINGLE = (EPS_M ** 0.5, 0.25)
    HALF = (EPS_M ** 0.25, 0.0625)

    @property
    def accuracy(self) -> float:
        return self.value[0]

    @property
    def cost(self) -> float:
        return self.value[1]


@dataclass(frozen=True)
class ProductOutcome:
    product: np.ndarray
    omega_hat: float
    injected_error: np.ndarray
    cost: float


@dataclass
class CostLedger:
    per_iteration: list[float] = field(default_factory=list)

    def charge(self, cost: float) -> None:
        if cost < 0.0:
            raise ValueError("negative cost")
        self.per_iteration.append(cost)

    @property
    def total(self) -> float:
        return sum(self.per_iteration)


def cost_continuous(omega_hat: float) -> float:
    """Cost of a product of accuracy ``omega_hat`` in full-accuracy units.

    A linearly convergent inner process of rate ``rho`` needs
    ``log(omega)/log(rho)`` steps; dividing by the full-accuracy count
    ``log(EPS_M)/log(rho)`` removes ``rho``.
    """
    if not (EPS_M <= omega_hat <= 1.0):
        raise OutOfRange(f"omega_hat={omega_hat} outside [EPS_M, 1]")
    return math.log(omega_hat) / math.log(EPS_M)


def product_exact(a: np.ndarray, p) -> ProductOutcome:
    p = as_vector(p)
    if a.shape[1] != p.shape[0]:
        raise DimensionMismatch(f"A is {a.shape}, p has length {p.shape[0]}")
    return ProductOutcome(a @ p, EPS_M, np.zeros_like(p), 1.0)


def _inject(a, spectral, p, omega_hat, mode, rng, chol):
    """Return ``(A p + e, e)`` with ``||e||`` saturating ``omega_hat``."""
    p = as_vector(p)
    if a.shape[1] != p.shape[0]:
        raise DimensionMismatch(f"A is {a.shape}, p has length {p.shape[0]}")
    p_norm = float(np.linalg.norm(p))
    if p_norm == 0.0:
        raise ZeroDirection("cannot scale an error relative to p = 0")
    ap = a @ p
    u = rng.standard_normal(p.shape[0])
    u /= np.linalg.norm(u)
    if mode is NormMode.TWO_NORM_RELATIVE:
        # implied E = e p^T / ||p||^2, ||E||_2 = ||e|| / ||p||
        eta = omega_hat * spectral.lambda_min_est * p_norm
    else:
        if chol is None:
            raise ValueError("primal-dual accuracy needs the Cholesky factor of A")
        # implied E = e (Ap)^T / ||p||_A^2, ||E||_{A^-1,A} = ||e||_{A^-1} / ||p||_A
        p_a = math.sqrt(max(float(p @ ap), 0.0))
        eta = omega_hat * p_a / dual_norm(chol, u)
    e = eta * u
    return ap + e, e


def product_continuous(
    a: np.ndarray,
    spectral: SpectralEstimates,
    p,
    req: AccuracyRequest,
    rng: np.random.Generator,
    chol: CholeskyFactor | None = None,
) -> ProductOutcome:
    """Product whose accuracy can be chosen continuously (``omega_hat = omega``).

    ``omega = 0`` is the exact limit: nothing is injected and the full cost 1
    is charged.
    """
    if req.omega == 0.0:
        out = product_exact(a, p)
        if not np.any(p):
            raise ZeroDirection("p = 0")
        return out
    omega_hat = max(req.omega, EPS_M)
    prod, e = _inject(a, spectral, p, omega_hat, req.norm_mode, rng, chol)
    return ProductOutcome(prod, omega_hat, e, cost_continuous(omega_hat))


def select_level(omega: float) -> PrecisionLevel:
    """Coarsest precision whose accuracy does not exceed ``omega``."""
    for level in (PrecisionLevel.HALF, PrecisionLevel.SINGLE):
        if level.accuracy <= omega:
            return level
    return PrecisionLevel.DOUBLE


def product_multiprecision(
    a: np.ndarray,
    spectral: SpectralEstimates,
    p,
    req: AccuracyRequest,
    rng: np.random.Generator,
    chol: CholeskyFactor | None = None,
) -> ProductOutcome:
    """Product computed in the cheapest of double/single/half precision that
    still meets the request; the error is simulated at that level."""
    level = select_level(req.omega)
    prod, e = _inject(a, spectral, p, level.accuracy, req.norm_mode, rng, chol)
    return ProductOutcome(prod, level.accuracy, e, level.cost)


# --------------------------------------------------------------------------
# Stateful oracles bound to one solve

class ExactOracle:
    """Full-accuracy products regardless of the request."""

    kind = "exact"

    def __init__(self, a: np.ndarray):
        self.A = a
        self.ledger = CostLedger()

    def apply(self, p, req: AccuracyRequest | None = None) -> ProductOutcome:
        out = product_exact(self.A, p)
        self.ledger.charge(out.cost)
        return out


class ContinuousOracle:
    kind = "continuous"
    _product = staticmethod(product_continuous)

    def __init__(
        self,
        a: np.ndarray,
        spectral: SpectralEstimates,
        *,
        seed: int = 0,
        chol: CholeskyFactor | None = None,
    ):
        self.A = a
        self.spectral = spectral
        self.chol = chol
        self.rng = np.random.default_rng(seed)
        self.ledger = CostLedger()

    def apply(self, p, req: AccuracyRequest) -> ProductOutcome:
        out = self._product(self.A, self.spectral, p, req, self.rng, self.chol)
        self.ledger.charge(out.cost)
        return out


class MultiPrecisionOracle(ContinuousOracle):
    kind = "multiprecision"
    _product = staticmethod(product_multiprecision)


def make_oracle(kind: str, a, spectral=None, *, seed: int = 0, chol=None):
    """Build an oracle by name: ``exact``, ``continuous`` or ``multiprecision``."""
    if kind == "exact":
        return ExactOracle(a)
    if spectral is None:
        raise ValueError(f"{kind} oracle needs spectral estimates")
    if kind == "continuous":
        return ContinuousOracle(a, spectral, seed=seed, chol=chol)
    if kind in ("multiprecision", "multi-precision"):
        return MultiPrecisionOracle(a, spectral, seed=seed, chol=chol)
    raise ValueError(f"unknown oracle kind {kind!r}")
