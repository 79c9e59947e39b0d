"""Dense symmetric linear algebra used by every other module.

Vectors and symmetric matrices are plain ``numpy`` float64 arrays; the
helpers :func:`as_vector` and :func:`as_symmatrix` validate and normalize
them.  A symmetric matrix is always rebuilt from its lower triangle so that
``A[i, j] == A[j, i]`` holds bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    NegativeQuadraticForm,
    NotPositiveDefinite,
    SingularMatrix,
)

#: binary64 unit roundoff, 2**-53.
EPS_M = float(np.finfo(np.float64).eps) / 2.0


def as_vector(v, n: int | None = None) -> np.ndarray:
    """Return ``v`` as a 1-D float64 array, checking length and finiteness."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"expected length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def as_symmatrix(a) -> np.ndarray:
    """Return a dense symmetric copy of ``a`` built from its lower triangle."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    low = np.tril(arr)
    return low + np.tril(arr, -1).T


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T == A`` up to rounding."""

    L: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]


@dataclass(frozen=True)
class SpectralEstimates:
    """Extreme-eigenvalue estimates and trace of an SPD matrix."""

    lambda_min_est: float
    lambda_max_est: float
    trace: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.lambda_min_est <= self.lambda_max_est):
            raise ValueError(
                f"need 0 < lambda_min_est <= lambda_max_est, got "
                f"{self.lambda_min_est}, {self.lambda_max_est}"
            )
        if not self.trace > 0.0:
            raise ValueError("trace must be positive")
        if self.n < 1:
            raise ValueError("order must be >= 1")

    @property
    def kappa(self) -> float:
        return self.lambda_max_est / self.lambda_min_est


def cholesky(a: np.ndarray) -> CholeskyFactor:
    """Factorize an SPD matrix; raises :class:`NotPositiveDefinite` otherwise."""
    a = as_symmatrix(a)
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    d = np.diag(L)
    if not np.all(np.isfinite(L)) or np.any(d <= 0.0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factorization")
    return CholeskyFactor(L)


def solve_spd(chol: CholeskyFactor, b) -> np.ndarray:
    """Solve ``A x = b`` given the Cholesky factor of ``A``."""
    b = as_vector(b, chol.n)
    y = solve_triangular(chol.L, b, lower=True, check_finite=False)
    return solve_triangular(chol.L, y, lower=True, trans="T", check_finite=False)


def dual_norm(chol: CholeskyFactor, v) -> float:
    """``||v||_{A^{-1}} = ||L^{-1} v||_2``."""
    v = as_vector(v, chol.n)
    return float(np.linalg.norm(solve_triangular(chol.L, v, lower=True, check_finite=False)))


def energy_norm(a: np.ndarray, v) -> float:
    """``||v||_A = sqrt(v^T A v)``.

    Small negative values of the quadratic form caused by rounding are
    clipped to zero; anything below ``-n * EPS_M * ||A||_F * ||v||^2`` is
    reported as :class:`NegativeQuadraticForm`.
    """
    v = as_vector(v, a.shape[0])
    form = float(v @ (a @ v))
    if form < 0.0:
        tol = a.shape[0] * EPS_M * np.linalg.norm(a, "fro") * float(v @ v)
        if form < -tol:
            raise NegativeQuadraticForm(f"v^T A v = {form:.3e} < 0")
        form = 0.0
    return math.sqrt(form)


def hessenberg_solve(h: np.ndarray, rhs) -> np.ndarray:
    """Solve ``H y = rhs`` for upper Hessenberg ``H``.

    Gaussian elimination with partial pivoting; on a Hessenberg matrix each
    column has a single subdiagonal entry, so pivoting only ever swaps
    adjacent rows and the elimination costs O(k^2).

    Raises
    ------
    SingularMatrix
        If a pivot is exactly zero after pivoting.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"H must be square, got shape {h.shape}")
    k = h.shape[0]
    y = as_vector(rhs, k).copy()
    if k > 2 and np.any(np.tril(h, -2)):
        raise ValueError("matrix is not upper Hessenberg")
    u = h.copy()
    for j in range(k - 1):
        if abs(u[j + 1, j]) > abs(u[j, j]):
            u[[j, j + 1], j:] = u[[j + 1, j], j:]
            y[j], y[j + 1] = y[j + 1], y[j]
        piv = u[j, j]
        if piv == 0.0:
            raise SingularMatrix(f"zero pivot in column {j}")
        m = u[j + 1, j] / piv
        if m != 0.0:
            u[j + 1, j:] -= m * u[j, j:]
            y[j + 1] -= m * y[j]
        u[j + 1, j] = 0.0
    if u[k - 1, k - 1] == 0.0:
        raise SingularMatrix(f"zero pivot in column {k - 1}")
    return solve_triangular(u, y, lower=False, check_finite=False)


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Seeded random orthogonal matrix (QR of a Gaussian, sign-fixed diagonal)."""
    if n < 1:
        raise ValueError("order must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q * signs
