"""FOM and CG for convex quadratics with inexact matrix-vector products.

The accuracy of each product is relaxed as the iteration proceeds while
keeping a guarantee on the final objective decrease; see the README.
"""

from .budget import BudgetState, budget_init, budget_update, k_max_spectral
from .dense import EPS_M, SpectralEstimates
from .harness import ExperimentSpec, MatrixMarketSource, SyntheticSource, audit, emit_table, run_experiment
from .metrics import EvalResult, evaluate
from .oracle import (
    AccuracyRequest,
    ContinuousOracle,
    ExactOracle,
    MultiPrecisionOracle,
    NormMode,
    make_oracle,
)
from .problems import (
    QuadraticProblem,
    SpectrumSpec,
    gen_synthetic,
    make_problem,
    matrix_market_problem,
    parse_matrix_market,
    perturb_estimates,
)
from .solvers import Method, Mode, PhiPolicy, SolverConfig, SolveReport, solve, solve_cg, solve_fom

__version__ = "0.1.0"
