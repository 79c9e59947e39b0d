"""Test problems: synthetic log-spaced spectra and Matrix Market matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dense import (
    CholeskyFactor,
    SpectralEstimates,
    as_symmatrix,
    as_vector,
    cholesky,
    random_orthogonal,
    solve_spd,
)
from .errors import InvalidSpec, MalformedFile, NotSymmetric, UnsupportedFormat

DATA_DIR = Path(__file__).resolve().parent / "data"


@dataclass(frozen=True)
class QuadraticProblem:
    """``min 1/2 x^T A x - b^T x`` together with its exact solution.

    ``q_star = -1/2 b^T x_star`` is the optimal value and ``spectral_true``
    holds the exact extreme eigenvalues and trace of ``A``.
    """

    A: np.ndarray
    b: np.ndarray
    chol: CholeskyFactor
    x_star: np.ndarray
    q_star: float
    spectral_true: SpectralEstimates
    name: str = ""

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def q(self, x) -> float:
        """Objective value evaluated with an exact product."""
        x = as_vector(x, self.n)
        return float(0.5 * (x @ (self.A @ x)) - self.b @ x)


@dataclass(frozen=True)
class SpectrumSpec:
    n: int
    kappa: float
    lambda_max: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpec("log-equidistant spectra need n >= 2")
        if not self.kappa >= 1.0:
            raise InvalidSpec(f"kappa must be >= 1, got {self.kappa}")
        if self.kappa >= 1e15:
            raise InvalidSpec("kappa >= 1e15 is beyond double precision")
        if not self.lambda_max > 0.0:
            raise InvalidSpec("lambda_max must be positive")

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in decreasing order, equidistant in log10."""
        i = np.arange(self.n, dtype=np.float64)
        return self.lambda_max * 10.0 ** (-i * math.log10(self.kappa) / (self.n - 1))


def make_problem(a, b, *, name: str = "", eigenvalues=None) -> QuadraticProblem:
    """Package an SPD matrix and right-hand side with their ground truth.

    If ``eigenvalues`` is not given, the spectrum is computed densely.
    """
    a = as_symmatrix(a)
    b = as_vector(b, a.shape[0])
    chol = cholesky(a)
    x_star = solve_spd(chol, b)
    q_star = float(-0.5 * (b @ x_star))
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvalsh(a)
    lam = np.asarray(eigenvalues, dtype=np.float64)
    spectral = SpectralEstimates(
        lambda_min_est=float(lam.min()),
        lambda_max_est=float(lam.max()),
        trace=float(np.trace(a)),
        n=a.shape[0],
    )
    return QuadraticProblem(a, b, chol, x_star, q_star, spectral, name)


def random_rhs(n: int, seed: int) -> np.ndarray:
    """Standard Gaussian vector normalized to unit two-norm."""
    b = np.random.default_rng(seed).standard_normal(n)
    return b / np.linalg.norm(b)


def gen_synthetic(spec: SpectrumSpec, seed: int) -> QuadraticProblem:
    """Random ``A = Q diag(lambda) Q^T`` with a log-spaced spectrum and unit ``b``.

    The orthogonal factor and the right-hand side come from independent
    child streams of ``seed``.
    """
    q_seed, b_seed = np.random.SeedSequence(seed).spawn(2)
    lam = spec.eigenvalues()
    q = random_orthogonal(spec.n, q_seed.generate_state(1)[0])
    a = (q * lam) @ q.T
    b = random_rhs(spec.n, b_seed.generate_state(1)[0])
    name = f"synth-n{spec.n}-k{spec.kappa:.0e}"
    return make_problem(a, b, name=name, eigenvalues=lam)


# --------------------------------------------------------------------------
# Matrix Market

@dataclass(frozen=True)
class MatrixMarketHeader:
    layout: str  # "coordinate" | "array"
    field: str
    symmetry: str
    rows: int
    cols: int
    entries: int  # stored entries (nnz for coordinate)


def _read_header(lines) -> tuple[MatrixMarketHeader, int]:
    """Parse banner and size line; return the header and index of first data line."""
    if not lines:
        raise MalformedFile("empty file")
    banner = lines[0].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise MalformedFile("missing %%MatrixMarket banner")
    obj, layout, field, symmetry = (t.lower() for t in banner[1:])
    if obj != "matrix":
        raise UnsupportedFormat(f"object {obj!r} is not 'matrix'")
    if layout not in ("coordinate", "array"):
        raise UnsupportedFormat(f"layout {layout!r}")
    if field not in ("real", "integer", "double"):
        raise UnsupportedFormat(f"field {field!r}")
    if symmetry not in ("symmetric", "general"):
        raise UnsupportedFormat(f"symmetry {symmetry!r}")

    i = 1
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("%")):
        i += 1
    if i == len(lines):
        raise MalformedFile("missing size line")
    try:
        sizes = [int(t) for t in lines[i].split()]
    except ValueError:
        raise MalformedFile(f"bad size line: {lines[i]!r}") from None
    if layout == "coordinate":
        if len(sizes) != 3:
            raise MalformedFile("coordinate size line needs 'rows cols nnz'")
        rows, cols, entries = sizes
    else:
        if len(sizes) != 2:
            raise MalformedFile("array size line needs 'rows cols'")
        rows, cols = sizes
        entries = rows * (rows + 1) // 2 if symmetry == "symmetric" else rows * cols
    if rows < 1 or cols < 1 or entries < 0:
        raise MalformedFile("non-positive dimensions")
    if rows != cols:
        raise MalformedFile(f"matrix is {rows}x{cols}, not square")
    return MatrixMarketHeader(layout, field, symmetry, rows, cols, entries), i + 1


def read_matrix_market_header(path) -> MatrixMarketHeader:
    with open(path) as fh:
        lines = fh.read().splitlines()
    return _read_header(lines)[0]


def parse_matrix_market(path) -> np.ndarray:
    """Read a real symmetric Matrix Market file into a dense symmetric array.

    Coordinate files may list an entry several times; duplicates are summed.
    ``general`` files are accepted when numerically symmetric (relative
    asymmetry at most 1e-12).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    hdr, start = _read_header(lines)
    n = hdr.rows
    data = [ln for ln in lines[start:] if ln.strip() and not ln.lstrip().startswith("%")]
    if len(data) != hdr.entries:
        raise MalformedFile(f"header announces {hdr.entries} entries, found {len(data)}")

    a = np.zeros((n, n))
    if hdr.layout == "coordinate":
        for ln in data:
            tok = ln.split()
            if len(tok) != 3:
                raise MalformedFile(f"bad entry line: {ln!r}")
            try:
                i, j, val = int(tok[0]) - 1, int(tok[1]) - 1, float(tok[2])
            except ValueError:
                raise MalformedFile(f"bad entry line: {ln!r}") from None
            if not (0 <= i < n and 0 <= j < n):
                raise MalformedFile(f"index out of range: {ln!r}")
            if hdr.symmetry == "symmetric":
                if i < j:
                    raise MalformedFile(f"symmetric file stores upper entry: {ln!r}")
                a[i, j] += val
                if i != j:
                    a[j, i] += val
            else:
                a[i, j] += val
    else:
        try:
            vals = [float(ln.split()[0]) for ln in data]
        except (ValueError, IndexError):
            raise MalformedFile("bad array entry") from None
        it = iter(vals)
        # column-major; symmetric files store the lower triangle only
        for j in range(n):
            for i in range(j if hdr.symmetry == "symmetric" else 0, n):
                a[i, j] = next(it)
                if hdr.symmetry == "symmetric":
                    a[j, i] = a[i, j]

    if hdr.symmetry == "general":
        scale = np.abs(a).max()
        if scale > 0 and np.abs(a - a.T).max() > 1e-12 * scale:
            raise NotSymmetric("general matrix is not numerically symmetric")
    return as_symmatrix(a)


def write_matrix_market(path, a, *, comment: str = "") -> None:
    """Write the lower triangle of ``a`` in coordinate real symmetric format.

    Values use 17 significant digits so that parsing back is bit-exact.
    Zero entries are skipped.
    """
    a = as_symmatrix(a)
    n = a.shape[0]
    rows, cols = np.nonzero(np.tril(a))
    order = np.lexsort((rows, cols))  # column-major, like the NIST files
    with open(path, "w", newline="\n") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        for line in comment.splitlines():
            fh.write(f"% {line}\n")
        fh.write(f"{n} {n} {len(rows)}\n")
        for k in order:
            fh.write(f"{rows[k] + 1} {cols[k] + 1} {float(a[rows[k], cols[k]])!r}\n")


def matrix_market_problem(path, rhs_seed: int = 0) -> QuadraticProblem:
    """Problem from a Matrix Market file with a seeded unit random right-hand side."""
    a = parse_matrix_market(path)
    b = random_rhs(a.shape[0], rhs_seed)
    return make_problem(a, b, name=Path(path).stem)


def bundled_matrices() -> list[Path]:
    """Sample Matrix Market files shipped with the package."""
    return sorted(DATA_DIR.glob("*.mtx"))


# --------------------------------------------------------------------------
# Spectral estimates

def perturb_estimates(true_est: SpectralEstimates, seed) -> SpectralEstimates:
    """Randomly perturb both eigenvalue estimates by a relative factor in [1, 2].

    Each estimate is independently multiplied or divided (fair coin) by
    ``1 + u`` with ``u ~ U(0, 1)``.  If the perturbed pair is out of order it
    is swapped.  ``seed`` may be an int or any object exposing
    ``uniform()`` and ``random()`` like :class:`numpy.random.Generator`.
    """
    rng = np.random.default_rng(seed) if isinstance(seed, (int, np.integer)) else seed

    def _one(lam: float) -> float:
        u = float(rng.uniform(0.0, 1.0))
        return lam * (1.0 + u) if rng.random() < 0.5 else lam / (1.0 + u)

    lo = _one(true_est.lambda_min_est)
    hi = _one(true_est.lambda_max_est)
    if lo > hi:
        lo, hi = hi, lo
    return SpectralEstimates(lo, hi, true_est.trace, true_est.n)
