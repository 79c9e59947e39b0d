"""Experiment grids, result tables and the invariant audit."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .dense import dual_norm
from .errors import ConfigError, InexactKrylovError
from .metrics import evaluate, true_residual
from .oracle import ContinuousOracle, ExactOracle, MultiPrecisionOracle
from .problems import SpectrumSpec, gen_synthetic, matrix_market_problem, perturb_estimates
from .solvers import Method, Mode, PhiPolicy, SolverConfig, residual_gap_audit, solve

METHODS = ("FOM", "iFOM", "CG", "CGR", "iCG", "iCGR")
CSV_HEADER = ("method", "problem", "kappa", "n_it", "cost", "r_res_gap",
              "r_sol_err", "r_val_err", "termination", "seed")


@dataclass(frozen=True)
class SyntheticSource:
    n: int = 200
    kappas: tuple[float, ...] = (1e1, 1e2, 1e3, 1e4)
    seed: int = 0

    def descriptors(self):
        return [("synth", self.n, float(k), self.seed) for k in self.kappas]


@dataclass(frozen=True)
class MatrixMarketSource:
    paths: tuple[str, ...]
    rhs_seed: int = 0

    def descriptors(self):
        return [("mm", str(p), self.rhs_seed) for p in self.paths]


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment grid: problems x eps x methods x seeds.

    ``mode`` applies to the inexact methods (``iFOM``, ``iCG``, ``iCGR``);
    the exact-product methods always run in exact mode.
    """

    sources: tuple = (SyntheticSource(),)
    eps_list: tuple[float, ...] = (1e-3,)
    methods: tuple[str, ...] = METHODS
    oracle: str = "continuous"
    mode: str = "practical"
    perturb_estimates: bool = True
    delay_d: int = 10
    k_max_user: int | None = None
    seeds: tuple[int, ...] = (0,)
    phi_policy: str = "managed"
    first_estimate: str = "dual"
    jobs: int = 1

    def __post_init__(self):
        if not self.sources or not self.eps_list or not self.methods or not self.seeds:
            raise ConfigError("experiment grid is empty")
        for eps in self.eps_list:
            if not (0.0 < eps < 1.0):
                raise ConfigError(f"eps must lie in (0, 1), got {eps}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if self.oracle not in ("continuous", "multiprecision"):
            raise ConfigError(f"unknown oracle {self.oracle!r}")
        if self.mode not in ("theoretical", "practical"):
            raise ConfigError(f"inexact methods run in theoretical or practical mode, not {self.mode!r}")
        if self.phi_policy not in ("managed", "constant"):
            raise ConfigError(f"unknown phi policy {self.phi_policy!r}")
        if self.first_estimate not in ("dual", "value"):
            raise ConfigError(f"unknown first estimate rule {self.first_estimate!r}")
        for src in self.sources:
            if isinstance(src, MatrixMarketSource):
                for p in src.paths:
                    if not Path(p).is_file():
                        raise ConfigError(f"cannot read Matrix Market file {p}")


@dataclass(frozen=True)
class ResultRow:
    method: str
    problem: str
    kappa: float | str
    n_it: int
    cost: float
    r_res_gap: float
    r_sol_err: float
    r_val_err: float
    termination: str
    seed: int
    eps: float = math.nan


# --------------------------------------------------------------------------
# grid execution

@lru_cache(maxsize=32)
def _problem(desc):
    if desc[0] == "synth":
        _, n, kappa, seed = desc
        return gen_synthetic(SpectrumSpec(n, kappa), seed)
    _, path, rhs_seed = desc
    return matrix_market_problem(path, rhs_seed)


def _kappa_label(desc, problem):
    return desc[2] if desc[0] == "synth" else problem.name


def _estimates(problem, p_idx, seed, perturb):
    if not perturb:
        return problem.spectral_true
    return perturb_estimates(problem.spectral_true, np.random.default_rng([seed, p_idx, 7]))


def _config(method, eps, spec, seed, *, record=False):
    inexact = method.startswith("i")
    base = method[1:] if inexact else method
    mode = Mode(spec.mode) if inexact else Mode.EXACT
    return SolverConfig(
        eps=eps,
        delay_d=spec.delay_d,
        k_max_user=spec.k_max_user,
        mode=mode,
        method=Method.FOM if base == "FOM" else Method.CG,
        reorth=base == "CGR",
        phi_policy=PhiPolicy(spec.phi_policy),
        first_estimate=spec.first_estimate,
        seed=seed,
        record_vectors=record,
    )


def _oracle(method, spec, problem, est, cell_seed):
    if not method.startswith("i"):
        return ExactOracle(problem.A)
    cls = ContinuousOracle if spec.oracle == "continuous" else MultiPrecisionOracle
    return cls(problem.A, est, seed=cell_seed, chol=problem.chol)


def _run_cell(args):
    spec, p_idx, desc, e_idx, eps, method, seed, record = args
    try:
        problem = _problem(desc)
    except (OSError, InexactKrylovError) as exc:
        raise ConfigError(f"cannot load problem {desc}: {exc}") from exc
    est = _estimates(problem, p_idx, seed, spec.perturb_estimates)
    cell_seed = np.random.SeedSequence([seed, p_idx, e_idx, METHODS.index(method)])
    oracle = _oracle(method, spec, problem, est, cell_seed)
    config = _config(method, eps, spec, seed, record=record)
    label = _kappa_label(desc, problem)
    try:
        rep = solve(problem, oracle, None, config, estimates=est)
    except (InexactKrylovError, ArithmeticError, np.linalg.LinAlgError) as exc:
        nan = math.nan
        row = ResultRow(method, problem.name, label, 0, nan, nan, nan, nan,
                        type(exc).__name__, seed, eps)
        return row, None
    ev = evaluate(problem, rep.x_final, rep.r_final, rep.q_final)
    row = ResultRow(method, problem.name, label, rep.n_it, rep.total_cost, ev.r_res_gap,
                    ev.r_sol_err, ev.r_val_err, rep.termination_reason.value, seed, eps)
    return row, (rep if record else None)


def _cells(spec, record=False):
    descs = [d for src in spec.sources for d in src.descriptors()]
    order = [m for m in METHODS if m in spec.methods]
    return [
        (spec, p_idx, desc, e_idx, eps, method, seed, record)
        for p_idx, desc in enumerate(descs)
        for e_idx, eps in enumerate(spec.eps_list)
        for method in order
        for seed in spec.seeds
    ]


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Solve every (problem, eps, method, seed) cell of the grid.

    Rows come back in grid order whatever ``spec.jobs`` is.  Solver failures
    become rows whose termination field names the exception.
    """
    cells = _cells(spec)
    try:
        if spec.jobs > 1:
            with ProcessPoolExecutor(spec.jobs) as pool:
                out = list(pool.map(_run_cell, cells))
        else:
            out = [_run_cell(c) for c in cells]
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    return [row for row, _ in out]


# --------------------------------------------------------------------------
# tables

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{x:.5e}"


def emit_table(rows, format: str = "csv") -> bytes:
    """Render rows as CSV or as aligned text blocks (one per eps)."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.method, r.problem, _fmt(r.kappa), r.n_it, _fmt(r.cost),
                        _fmt(r.r_res_gap), _fmt(r.r_sol_err), _fmt(r.r_val_err),
                        r.termination, r.seed])
        return buf.getvalue().encode()
    if format == "text":
        return _text_table(rows).encode()
    raise ValueError(f"unknown table format {format!r}")


def _text_table(rows) -> str:
    head = ("method", "kappa", "n_it", "cost", "r.res.gap", "r.sol.err", "r.val.err", "termination", "seed")
    blocks = []
    for eps in dict.fromkeys(r.eps for r in rows):
        sel = [r for r in rows if r.eps == eps or (math.isnan(eps) and math.isnan(r.eps))]
        body = []
        prev = None
        for r in sel:
            kap = r.kappa if isinstance(r.kappa, str) else f"{r.kappa:.0e}"
            key = (r.problem, r.seed)
            if key == prev:
                kap = ""  # kappa shown once per group
            prev = key
            body.append((r.method, kap, str(r.n_it), f"{r.cost:.1e}", f"{r.r_res_gap:.1e}",
                         f"{r.r_sol_err:.1e}", f"{r.r_val_err:.1e}", r.termination, str(r.seed)))
        widths = [max(len(head[i]), *(len(b[i]) for b in body)) for i in range(len(head))]
        just = [str.ljust, str.ljust] + [str.rjust] * 5 + [str.ljust, str.rjust]

        def line(cells):
            return "  ".join(j(c, w) for j, c, w in zip(just, cells, widths)).rstrip()

        out = [f"eps = {eps:.0e}", line(head), "-" * len(line(head))]
        out += [line(b) for b in body]
        blocks.append("\n".join(out))
    return "\n\n".join(blocks) + "\n"


# --------------------------------------------------------------------------
# audit

@dataclass(frozen=True)
class AuditEntry:
    name: str
    passed: bool
    measured: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.measured


@dataclass
class AuditReport:
    entries: list[AuditEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[AuditEntry]:
        return [e for e in self.entries if not e.passed]

    def render(self) -> str:
        lines = [f"{'PASS' if e.passed else 'FAIL'}  {e.name}: measured={e.measured:.3e} "
                 f"bound={e.bound:.3e} slack={e.slack:.3e}" for e in self.entries]
        lines.append(f"{len(self.entries) - len(self.failures())}/{len(self.entries)} checks passed")
        return "\n".join(lines) + "\n"


def audit(spec: ExperimentSpec) -> AuditReport:
    """Run the grid in theoretical mode and check every invariant that the
    theory guarantees there.

    Per run: residual-gap identity (CG variants), gap bound
    ``||r(x) - r||_{A^-1} <= eps_pi ||b||_{A^-1}``, decrease
    ``r_sol_err <= eps``, value bound ``r_val_err <= sqrt(eps)(1+sqrt(eps))``
    and, for managed budgets ending at ``k <= k_max``,
    ``sum 1/phi_hat <= 1 + 1e-12``.
    """
    spec = replace(spec, mode="theoretical", jobs=1)
    report = AuditReport()
    for cell in _cells(spec, record=True):
        _, p_idx, desc, _, eps, method, seed, _ = cell
        row, rep = _run_cell(cell)
        tag = f"{method} {row.problem} eps={eps:.0e} seed={seed}"
        if rep is None:
            report.entries.append(AuditEntry(f"{tag} solve ({row.termination})", False, math.inf, 0.0))
            continue
        problem = _problem(desc)
        add = report.entries.append
        if method in ("CG", "CGR", "iCG", "iCGR") and rep.trace:
            worst = max(float(np.linalg.norm(residual_gap_audit(problem, rep.trace, k)))
                        for k in range(1, rep.n_it + 1))
            bound = 1e-10 * float(np.linalg.norm(problem.b))
            add(AuditEntry(f"{tag} residual-gap identity", worst <= bound, worst, bound))
        eps_pi = 0.5 * math.sqrt(eps)
        gap = dual_norm(problem.chol, true_residual(problem, rep.x_final) - rep.r_final)
        bound = eps_pi * dual_norm(problem.chol, problem.b)
        add(AuditEntry(f"{tag} gap bound", gap <= bound, gap, bound))
        add(AuditEntry(f"{tag} decrease", row.r_sol_err <= eps, row.r_sol_err, eps))
        vb = math.sqrt(eps) * (1.0 + math.sqrt(eps))
        add(AuditEntry(f"{tag} value bound", row.r_val_err <= vb, row.r_val_err, vb))
        if method.startswith("i") and spec.phi_policy == "managed" and rep.n_it <= rep.k_max:
            s = rep.phi_hat_sum
            add(AuditEntry(f"{tag} budget", s <= 1.0 + 1e-12, s, 1.0 + 1e-12))
    return report
