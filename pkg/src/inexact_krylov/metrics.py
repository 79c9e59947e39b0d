"""Ground-truth evaluation of a computed solution.

All three quantities are relative to ``|q(x_*)|``:

* ``r_res_gap``: ``1/2 ||r(x) - r||^2_{A^-1}``, the squared residual gap;
* ``r_sol_err``: ``q(x) - q(x_*)``, the optimality gap (non-negative);
* ``r_val_err``: ``|q(x) - q|``, error of the solver's own objective value.

``q(x)`` is always evaluated with an exact product, never from recurrences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import as_vector, dual_norm
from .problems import QuadraticProblem


@dataclass(frozen=True)
class EvalResult:
    r_res_gap: float
    r_sol_err: float
    r_val_err: float


def true_residual(problem: QuadraticProblem, x) -> np.ndarray:
    """``r(x) = A x - b``."""
    x = as_vector(x, problem.n)
    return problem.A @ x - problem.b


def evaluate(problem: QuadraticProblem, x, r_recurred, q_recurred: float) -> EvalResult:
    x = as_vector(x, problem.n)
    r_recurred = as_vector(r_recurred, problem.n)
    scale = abs(problem.q_star)
    gap = dual_norm(problem.chol, true_residual(problem, x) - r_recurred)
    qx = problem.q(x)
    return EvalResult(
        r_res_gap=0.5 * gap**2 / scale,
        r_sol_err=(qx - problem.q_star) / scale,
        r_val_err=abs(qx - q_recurred) / scale,
    )
