"""Command-line driver.

Examples::

    inexact-krylov --problem synth:n=200,kappa=1e1/1e2/1e3,seed=7 --eps 1e-3 --format text
    inexact-krylov --problem mm:nos4_like.mtx --method CGR,iCGR --oracle multiprecision
    inexact-krylov --problem synth:n=60,kappa=1e2 --audit

Settings may also come from a ``key = value`` file given with ``--config``;
keys are the long option names.  Options on the command line win.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import (
    METHODS,
    ExperimentSpec,
    MatrixMarketSource,
    SyntheticSource,
    audit,
    emit_table,
    run_experiment,
)
from .problems import DATA_DIR

DEFAULTS = {
    "problem": ["synth:n=200,kappa=1e1/1e2/1e3/1e4"],
    "eps": "1e-3",
    "method": ",".join(METHODS),
    "mode": "practical",
    "oracle": "continuous",
    "reorth": False,
    "delay": 10,
    "kmax": None,
    "seed": "0",
    "perturb_estimates": False,
    "out": None,
    "format": "csv",
    "audit": False,
    "phi_policy": "managed",
    "first_estimate": "dual",
    "jobs": 1,
}

_BOOL = {"reorth", "perturb_estimates", "audit"}


def parse_problem(text: str):
    """``synth:n=200,kappa=1e1/1e2,seed=7`` or ``mm:path[,path...][;rhs_seed=0]``."""
    kind, _, rest = text.partition(":")
    if kind == "synth":
        opts = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"bad synthetic option {item!r}")
            opts[key.strip()] = val.strip()
        unknown = set(opts) - {"n", "kappa", "seed"}
        if unknown:
            raise ConfigError(f"unknown synthetic options {sorted(unknown)}")
        try:
            n = int(opts.get("n", 200))
            kappas = tuple(float(k) for k in opts.get("kappa", "1e1/1e2/1e3/1e4").split("/"))
            seed = int(opts.get("seed", 0))
        except ValueError as exc:
            raise ConfigError(f"bad synthetic problem {text!r}: {exc}") from None
        return SyntheticSource(n, kappas, seed)
    if kind == "mm":
        paths, _, tail = rest.partition(";")
        rhs_seed = 0
        if tail:
            key, _, val = tail.partition("=")
            if key.strip() != "rhs_seed":
                raise ConfigError(f"unknown Matrix Market option {tail!r}")
            rhs_seed = int(val)
        resolved = []
        for p in filter(None, paths.split(",")):
            path = Path(p)
            if not path.is_file() and (DATA_DIR / p).is_file():
                path = DATA_DIR / p  # bundled sample by bare name
            resolved.append(str(path))
        if not resolved:
            raise ConfigError("mm: needs at least one path")
        return MatrixMarketSource(tuple(resolved), rhs_seed)
    raise ConfigError(f"problem must start with 'synth:' or 'mm:', got {text!r}")


def _floats(text) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _ints(text) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def read_config(path) -> dict:
    """Read a ``key = value`` file (``#`` comments allowed)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    cp = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from None
    out = {}
    for key, val in cp["run"].items():
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        if key in _BOOL:
            out[key] = cp["run"].getboolean(key)
        elif key == "problem":
            out[key] = [v.strip() for v in val.splitlines() if v.strip()]
        else:
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="inexact-krylov",
        description="Run FOM/CG with inexact products on a grid of test problems.",
    )
    S = argparse.SUPPRESS
    ap.add_argument("--problem", action="append", default=S,
                    help="synth:n=200,kappa=1e1/1e2,seed=0 or mm:file.mtx (repeatable)")
    ap.add_argument("--eps", default=S, help="comma-separated target accuracies")
    ap.add_argument("--method", default=S, help=f"comma-separated subset of {','.join(METHODS)}")
    ap.add_argument("--mode", choices=["practical", "theoretical"], default=S)
    ap.add_argument("--oracle", choices=["continuous", "multiprecision"], default=S)
    ap.add_argument("--reorth", action="store_true", default=S,
                    help="replace CG by CGR and iCG by iCGR")
    ap.add_argument("--delay", type=int, default=S, help="delay d of the stopping test")
    ap.add_argument("--kmax", type=int, default=S, help="iteration cap (default 3n)")
    ap.add_argument("--seed", default=S, help="comma-separated run seeds")
    ap.add_argument("--perturb-estimates", dest="perturb_estimates", action="store_true", default=S)
    ap.add_argument("--phi-policy", dest="phi_policy", choices=["managed", "constant"], default=S)
    ap.add_argument("--first-estimate", dest="first_estimate", choices=["dual", "value"], default=S)
    ap.add_argument("--jobs", type=int, default=S)
    ap.add_argument("--out", default=S, help="output file (default stdout)")
    ap.add_argument("--format", choices=["csv", "text"], default=S)
    ap.add_argument("--audit", action="store_true", default=S,
                    help="run the invariant audit in theoretical mode")
    ap.add_argument("--config", help="key = value settings file")
    return ap


def spec_from_settings(opt: dict) -> ExperimentSpec:
    methods = [m.strip() for m in str(opt["method"]).split(",") if m.strip()]
    if opt["reorth"]:
        methods = [{"CG": "CGR", "iCG": "iCGR"}.get(m, m) for m in methods]
    kmax = opt["kmax"]
    return ExperimentSpec(
        sources=tuple(parse_problem(p) for p in opt["problem"]),
        eps_list=_floats(opt["eps"]),
        methods=tuple(dict.fromkeys(methods)),
        oracle=opt["oracle"],
        mode=opt["mode"],
        perturb_estimates=bool(opt["perturb_estimates"]),
        delay_d=int(opt["delay"]),
        k_max_user=int(kmax) if kmax not in (None, "", "None") else None,
        seeds=_ints(opt["seed"]),
        phi_policy=opt["phi_policy"],
        first_estimate=opt["first_estimate"],
        jobs=int(opt["jobs"]),
    )


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    try:
        opt = dict(DEFAULTS)
        cfg = args.pop("config", None)
        if cfg:
            opt.update(read_config(cfg))
        opt.update(args)
        spec = spec_from_settings(opt)
        if opt["audit"]:
            report = audit(spec)
            payload = report.render().encode()
        else:
            payload = emit_table(run_experiment(spec), opt["format"])
        if opt["out"]:
            Path(opt["out"]).write_bytes(payload)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
    except (ConfigError, ValueError) as exc:
        print(f"inexact-krylov: error: {exc}", file=sys.stderr)
        return 1
    if opt["audit"] and not report.passed:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
