"""Command-line front end.

``whiter example1``, ``whiter example2`` and ``whiter solve CONFIG`` run the
solver and write the unknowns, a convergence report and (for the built-in
examples) errors against the closed-form solutions. ``whiter split EXPR`` runs
the splitting step alone.

Samples go to CSV files with columns ``alpha_re, alpha_im, value_re,
value_im`` or, with ``--format json``, to JSON with complex numbers as
``[re, im]`` pairs.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import examples as ex
from . import oracles
from .analytic_core import (
    DEFAULT_HALF_WIDTH,
    DEFAULT_N_POINTS,
    HalfPlaneFunction,
    LineGrid,
    LineSamples,
    Strip,
    norm_on_line,
    sample,
)
from .errors import (
    ClassViolationError,
    ConfigError,
    DivergenceError,
    DomainError,
    SingularityError,
    WhiterError,
)
from .expr import parse_expression
from .splitting import additive_split, multiplicative_split, winding_index
from .whsolver import (
    ProblemSpec,
    SolverOptions,
    coupled_residual,
    coupling_E,
    initial_phi,
    phi_from_E,
    reduce,
    solve,
    solve_coupled,
)

log = logging.getLogger("whiter")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DIVERGED = 2
EXIT_CLASS = 3
EXIT_CONFIG = 4

DEFAULTS = {
    "example1": {"lambda": "0.7+10i", "L": 1.0},
    "example2": {"lambda": 0.1, "L": 1e-4},
}
SYMBOLS = ("A", "B", "C", "f1", "f2")


def parse_complex(value) -> complex:
    """Accept numbers, ``[re, im]`` pairs and strings like ``0.7+10i``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex pair must have two entries, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError:
            pass
    raise ConfigError(f"cannot read {value!r} as a complex number")


@dataclass
class RunConfig:
    problem: str = "example1"
    lam: complex | None = None
    L: float | None = None
    iters: int = 50
    tol: float = 1e-8
    grid_n: int | None = None
    grid_x: float | None = None
    line_a: float | None = None
    line_b: float | None = None
    out: str = "whiter_out"
    format: str = "csv"
    plot_window: float = 20.0
    symbols: dict[str, str] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    strip: tuple[float, float] | None = None

    def __post_init__(self):
        if self.problem not in ("example1", "example2", "custom"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.iters < 0:
            raise ConfigError("iters must be nonnegative")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.grid_n is not None and (self.grid_n < 16 or self.grid_n & (self.grid_n - 1)):
            raise ConfigError(f"grid-n must be a power of two >= 16, got {self.grid_n}")
        if self.grid_x is not None and not self.grid_x > 0:
            raise ConfigError("grid-x must be positive")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive")
        if self.problem == "custom":
            missing = [s for s in SYMBOLS if s not in self.symbols]
            if missing:
                raise ConfigError(f"custom problem needs expressions for {', '.join(missing)}")
            if self.strip is None:
                raise ConfigError("custom problem needs 'strip': [a, b]")

    @property
    def out_dir(self) -> Path:
        return Path(os.environ.get("WHITER_OUT") or self.out)


# flag name -> RunConfig attribute
_KEYS = {
    "problem": "problem",
    "lambda": "lam",
    "lam": "lam",
    "L": "L",
    "iters": "iters",
    "tol": "tol",
    "grid-n": "grid_n",
    "grid-x": "grid_x",
    "line-a": "line_a",
    "line-b": "line_b",
    "out": "out",
    "format": "format",
    "plot-window": "plot_window",
    "strip": "strip",
    "params": "params",
}


def config_from_mapping(data: dict) -> RunConfig:
    kw: dict[str, Any] = {}
    symbols = {}
    for key, value in data.items():
        name = _KEYS.get(key) or _KEYS.get(key.replace("_", "-"))
        if key in SYMBOLS:
            symbols[key] = value
        elif name is None:
            raise ConfigError(f"unknown config key {key!r}")
        else:
            kw[name] = value
    if symbols:
        kw["symbols"] = symbols
        kw.setdefault("problem", "custom")
    try:
        if kw.get("lam") is not None:
            kw["lam"] = parse_complex(kw["lam"])
        for k in ("L", "tol", "grid_x", "line_a", "line_b", "plot_window"):
            if kw.get(k) is not None:
                kw[k] = float(kw[k])
        for k in ("iters", "grid_n"):
            if kw.get(k) is not None:
                if float(kw[k]) != int(kw[k]):
                    raise ConfigError(f"{k} must be an integer")
                kw[k] = int(kw[k])
        if kw.get("strip") is not None:
            a, b = kw["strip"]
            kw["strip"] = (float(a), float(b))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return RunConfig(**kw)


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


# --------------------------------------------------------------------------
# writers


def _pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex)]


def _finite(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [_finite(obj.real), _finite(obj.imag)]
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_finite(obj), indent=1, sort_keys=True, allow_nan=False) + "\n")
    return path


def write_samples(out_dir: Path, name: str, f: LineSamples, fmt: str, window: float | None = None) -> Path:
    z = f.grid.points
    v = f.values
    if window is not None:
        keep = np.abs(z.real) <= window
        z, v = z[keep], v[keep]
    if fmt == "json":
        return write_json(out_dir / f"{name}.json", {"alpha": _pairs(z), "value": _pairs(v)})
    path = out_dir / f"{name}.csv"
    table = np.column_stack([z.real, z.imag, v.real, v.imag])
    np.savetxt(path, table, delimiter=",", fmt="%.17g", header="alpha_re,alpha_im,value_re,value_im", comments="")
    return path


def write_table(out_dir: Path, name: str, rows: list[dict], fmt: str) -> Path:
    if fmt == "json":
        return write_json(out_dir / f"{name}.json", rows)
    path = out_dir / f"{name}.csv"
    cols = list(rows[0]) if rows else []
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(repr(float(r[c])) if not isinstance(r[c], int) else str(r[c]) for c in cols))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_samples(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_samples`: ``(alpha, value)`` arrays."""
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        alpha = np.array([complex(*p) for p in data["alpha"]])
        value = np.array([complex(*p) for p in data["value"]])
        return alpha, value
    t = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return t[:, 0] + 1j * t[:, 1], t[:, 2] + 1j * t[:, 3]


# --------------------------------------------------------------------------
# runs


@dataclass
class RunArtifacts:
    config: RunConfig
    out_dir: Path
    files: dict[str, Path] = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    iterates: dict[str, list[LineSamples]] = field(default_factory=dict, repr=False)
    errors: list[dict] | None = None
    exit_code: int = EXIT_OK


def _exit_for(rep) -> int:
    # running out of iterations while still contracting is a truncated run,
    # not a failure; growing increments are
    inc = rep.phi_increments if hasattr(rep, "phi_increments") else rep.increments
    if rep.converged or rep.stagnated or len(inc) < 2 or inc[-1] < inc[-2]:
        return EXIT_OK
    return EXIT_DIVERGED


def _grid_overrides(cfg: RunConfig) -> dict:
    kw = {}
    if cfg.grid_n is not None:
        kw["n_points"] = cfg.grid_n
    if cfg.grid_x is not None:
        kw["half_width"] = cfg.grid_x
    if cfg.line_a is not None:
        kw["line_a"] = cfg.line_a
    if cfg.line_b is not None:
        kw["line_b"] = cfg.line_b
    return kw


def _estimate_dict(est) -> dict:
    return {"q": est.q, "d1": est.d1, "d2": est.d2, "eps1": est.eps1, "eps2": est.eps2}


def _run_example1(cfg: RunConfig, art: RunArtifacts):
    lam = cfg.lam if cfg.lam is not None else parse_complex(DEFAULTS["example1"]["lambda"])
    L = cfg.L if cfg.L is not None else DEFAULTS["example1"]["L"]
    p = oracles.Example1Params(lam, L)
    opts = ex.example1_options(p, max_iter=cfg.iters, stop_tol=cfg.tol, **_grid_overrides(cfg))
    sys_ = reduce(ex.example1_problem(p), opts)
    sol, rep = solve(sys_, opts)
    consts = ex.example1_constants(sys_, rep.phi_iterates, rep.psi_iterates, lam)
    # iterates of Phi^(L) carried to the output line for plotting
    phis = [initial_phi(sys_, "out")]
    phis += [phi_from_E(sys_, coupling_E(sys_, psi), "out") for psi in rep.psi_iterates]
    art.iterates["phiL"] = [f.boundary for f in phis]
    first = rep.phi_increments[0] * norm_on_line(rep.phi_iterates[0].boundary) if rep.phi_increments else 0.0
    art.report = {
        "problem": "example1",
        "lambda": complex(lam),
        "L": L,
        "grid": {"half_width": sys_.line_a.grid.half_width, "n_points": sys_.line_a.grid.n_points},
        "lines": {"a": sys_.a, "b": sys_.b, "out": sys_.out},
        "iterations": rep.iterations,
        "converged": rep.converged,
        "stagnated": rep.stagnated,
        "phi_increments": rep.phi_increments,
        "psi_increments": rep.psi_increments,
        "d_increments": rep.d_increments,
        "e_increments": rep.e_increments,
        "ratios": rep.ratios,
        "residuals": [list(r) for r in rep.residuals],
        "estimate": _estimate_dict(rep.estimate),
        "a_priori_bound": [rep.estimate.a_priori_bound(n, first) for n in range(rep.iterations + 1)],
        "constants": [{"k1": k1, "k2": k2} for k1, k2 in consts],
    }
    art.exit_code = _exit_for(rep)
    return {"phi0_minus": sol.phi0_minus, "phiL_minus": sol.phiL_minus,
            "psi0_plus": sol.psi0_plus, "psiL_plus": sol.psiL_plus}


def _run_example2(cfg: RunConfig, art: RunArtifacts):
    lam = cfg.lam if cfg.lam is not None else complex(DEFAULTS["example2"]["lambda"])
    if abs(complex(lam).imag) > 0:
        raise ConfigError("Example 2 needs a real lambda")
    L = cfg.L if cfg.L is not None else DEFAULTS["example2"]["L"]
    p = oracles.Example2Params(complex(lam).real, L)
    pipe = ex.example2_pipeline(p, line_a=cfg.line_a, line_b=cfg.line_b, half_width=cfg.grid_x, n_points=cfg.grid_n)
    rep = solve_coupled(pipe.system, max_iter=cfg.iters, stop_tol=cfg.tol)
    zero = LineSamples.zeros(rep.P1[0].grid)
    U1 = [pipe.U1_plus(rep.P1[n], rep.P2[n - 1] if n else zero) for n in range(rep.iterations + 1)]
    U2 = [pipe.U2_minus(rep.P1[n], rep.P2[n]) for n in range(rep.iterations + 1)]
    art.iterates["U1_plus"] = U1
    art.iterates["U2_minus"] = U2
    grid = pipe.system.R1["a"].grid
    art.report = {
        "problem": "example2",
        "lambda": p.lam,
        "L": L,
        "grid": {"half_width": grid.half_width, "n_points": grid.n_points},
        "lines": {"a": pipe.system.a, "b": pipe.system.b, "out": pipe.system.out},
        "iterations": rep.iterations,
        "converged": rep.converged,
        "stagnated": rep.stagnated,
        "increments": rep.increments,
        "ratios": rep.ratios,
        "q": rep.q,
        "residual": coupled_residual(pipe.system, rep.P1[-1], rep.P2[-1]),
        "constants": [dict(zip(("C1", "C2"), pipe.constants(a, b))) for a, b in zip(rep.P1, rep.P2)],
    }
    art.exit_code = _exit_for(rep)
    return {"U1_plus": HalfPlaneFunction("plus", U1[-1]), "U2_minus": HalfPlaneFunction("minus", U2[-1])}


def custom_problem(cfg: RunConfig) -> ProblemSpec:
    params = {"L": cfg.L}
    if cfg.lam is not None:
        params["lam"] = cfg.lam
        params["lambda_"] = cfg.lam
    params.update({k: parse_complex(v) for k, v in cfg.params.items()})
    handles = {s: parse_expression(cfg.symbols[s], params) for s in SYMBOLS}
    return ProblemSpec(L=cfg.L, strip=Strip(*cfg.strip), **handles)


def _run_custom(cfg: RunConfig, art: RunArtifacts):
    if cfg.L is None:
        raise ConfigError("custom problem needs L")
    try:
        Strip(*cfg.strip)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    opts = SolverOptions(
        max_iter=cfg.iters, stop_tol=cfg.tol, line_a=cfg.line_a, line_b=cfg.line_b,
        half_width=cfg.grid_x or DEFAULT_HALF_WIDTH, n_points=cfg.grid_n or DEFAULT_N_POINTS,
    )
    sol, rep = solve(custom_problem(cfg), opts)
    art.iterates["phiL"] = [f.boundary for f in rep.phi_iterates]
    first = rep.phi_increments[0] * norm_on_line(rep.phi_iterates[0].boundary) if rep.phi_increments else 0.0
    art.report = {
        "problem": "custom",
        "symbols": dict(cfg.symbols),
        "L": cfg.L,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "stagnated": rep.stagnated,
        "phi_increments": rep.phi_increments,
        "psi_increments": rep.psi_increments,
        "d_increments": rep.d_increments,
        "e_increments": rep.e_increments,
        "ratios": rep.ratios,
        "residuals": [list(r) for r in rep.residuals],
        "estimate": _estimate_dict(rep.estimate),
        "a_priori_bound": [rep.estimate.a_priori_bound(n, first) for n in range(rep.iterations + 1)],
    }
    art.exit_code = _exit_for(rep)
    return {"phi0_minus": sol.phi0_minus, "phiL_minus": sol.phiL_minus,
            "psi0_plus": sol.psi0_plus, "psiL_plus": sol.psiL_plus}


def compare_to_oracle(art: RunArtifacts, example: str) -> list[dict]:
    """Per-iteration max-abs and L2 errors of the computed iterates.

    ``exact`` columns compare with the limit solution, ``iterate`` columns
    with the closed-form iterate of the same index.
    """
    rows = []
    if example == "example1":
        p = oracles.Example1Params(art.report["lambda"], art.report["L"])
        exact = oracles.example1_exact(p)
        art.iterates["phiL"]
        targets = [(exact.phiL, lambda z, n: exact.phiL_iterate(z, n))]
        names = ["phiL"]
    elif example == "example2":
        p = oracles.Example2Params(art.report["lambda"], art.report["L"])
        exact = oracles.example2_exact(p)
        targets = [(exact.U1_plus, exact.U1_plus_iterate), (exact.U2_minus, exact.U2_minus_iterate)]
        names = ["U1_plus", "U2_minus"]
    else:
        raise ConfigError(f"no oracle for {example!r}")
    for n in range(len(art.iterates[names[0]])):
        row: dict[str, Any] = {"iteration": n}
        for name, (lim, it) in zip(names, targets):
            f = art.iterates[name][n]
            z = f.grid.points
            for label, ref in (("exact", lim(z)), ("iterate", it(z, n))):
                diff = LineSamples(f.grid, f.values - ref)
                row[f"{name}_max_{label}"] = diff.max_abs()
                row[f"{name}_l2_{label}"] = norm_on_line(diff)
        rows.append(row)
    return rows


def run(cfg: RunConfig) -> RunArtifacts:
    out_dir = cfg.out_dir
    art = RunArtifacts(cfg, out_dir)
    runner = {"example1": _run_example1, "example2": _run_example2, "custom": _run_custom}[cfg.problem]
    unknowns = runner(cfg, art)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, f in unknowns.items():
        art.files[name] = write_samples(out_dir, name, f.boundary, cfg.format)
    for name, series in art.iterates.items():
        for n, f in enumerate(series):
            key = f"{name}_iter{n:03d}"
            art.files[key] = write_samples(out_dir, key, f, cfg.format, window=cfg.plot_window)
    if cfg.problem != "custom":
        art.errors = compare_to_oracle(art, cfg.problem)
        art.files["errors"] = write_table(out_dir, "errors", art.errors, cfg.format)
    art.report["exit_code"] = art.exit_code
    art.files["report"] = write_json(out_dir / "report.json", art.report)
    return art


def run_split(expr: str, offset: float, cfg: RunConfig, multiplicative: bool) -> dict[str, Path]:
    params = {k: parse_complex(v) for k, v in cfg.params.items()}
    if cfg.L is not None:
        params["L"] = cfg.L
    if cfg.lam is not None:
        params["lam"] = cfg.lam
    f = parse_expression(expr, params)
    grid = LineGrid(offset, cfg.grid_x or DEFAULT_HALF_WIDTH, cfg.grid_n or DEFAULT_N_POINTS)
    samples = sample(f, grid)
    out_dir = cfg.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    summary: dict[str, Any] = {"expression": expr, "offset": offset,
                               "grid": {"half_width": grid.half_width, "n_points": grid.n_points}}
    if multiplicative:
        idx, resid = winding_index(samples, return_residual=True)
        summary["winding_index"] = idx
        fac = multiplicative_split(samples)
        files["plus_factor"] = write_samples(out_dir, "plus_factor", fac.plus_factor.boundary, cfg.format)
        files["minus_factor"] = write_samples(out_dir, "minus_factor", fac.minus_factor.boundary, cfg.format)
        recon = fac.plus_factor.boundary * fac.minus_factor.boundary - samples
    else:
        shifts = (0.0,) if cfg.L is None else (0.0, cfg.L, -cfg.L)
        parts = additive_split(samples, shifts=shifts)
        files["plus"] = write_samples(out_dir, "plus", parts.plus.boundary, cfg.format)
        files["minus"] = write_samples(out_dir, "minus", parts.minus.boundary, cfg.format)
        recon = parts.plus.boundary + parts.minus.boundary - samples
    summary["reconstruction_error"] = recon.max_abs()
    files["summary"] = write_json(out_dir / "split.json", summary)
    return files


# --------------------------------------------------------------------------
# argument handling


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--lambda", dest="lambda", help="lambda; complex values as 0.7+10i")
    p.add_argument("--L", type=float, help="shift L > 0 in the exponential factors")
    p.add_argument("--iters", type=int, help="maximum number of iterations")
    p.add_argument("--tol", type=float, help="relative increment stopping tolerance")
    p.add_argument("--grid-n", type=int, help="number of grid points (power of two)")
    p.add_argument("--grid-x", type=float, help="half width of the truncated line")
    p.add_argument("--line-a", type=float, help="lower working line Im(alpha) = a < 0")
    p.add_argument("--line-b", type=float, help="upper working line Im(alpha) = b > 0")
    p.add_argument("--out", help="output directory (WHITER_OUT takes precedence)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whiter", description="Iterative Wiener-Hopf solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="solve a problem described by a JSON config")
    p.add_argument("config")
    _add_common(p)
    for name in ("example1", "example2"):
        _add_common(sub.add_parser(name, help=f"run the built-in {name}"))
    p = sub.add_parser("split", help="split an expression in alpha on one line")
    p.add_argument("expression")
    p.add_argument("--offset", type=float, default=0.0, help="line Im(alpha) = offset")
    p.add_argument("--multiplicative", action="store_true", help="factorise instead of splitting")
    _add_common(p)
    return parser


def _flag_values(args: argparse.Namespace) -> dict:
    vals = {}
    for flag in ("lambda", "L", "iters", "tol", "grid-n", "grid-x", "line-a", "line-b", "out", "format"):
        v = getattr(args, flag.replace("-", "_"), None)
        if v is not None:
            vals[flag] = v
    return vals


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        data: dict[str, Any] = {}
        if args.command == "solve":
            data.update(load_config(args.config))
            data.setdefault("problem", "custom")
        elif args.command in ("example1", "example2"):
            data["problem"] = args.command
        data.update(_flag_values(args))
        if args.command == "split":
            data.setdefault("problem", "example1")
            files = run_split(args.expression, args.offset, config_from_mapping(data), args.multiplicative)
            print(files["summary"])
            return EXIT_OK
        art = run(config_from_mapping(data))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ClassViolationError, SingularityError, DomainError) as exc:
        print(f"class violation: {exc}", file=sys.stderr)
        return EXIT_CLASS
    except WhiterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    rep = art.report
    status = "converged" if rep.get("converged") else "stagnated" if rep.get("stagnated") else "stopped"
    print(f"{rep['problem']}: {status} after {rep['iterations']} iterations; output in {art.out_dir}")
    return art.exit_code


if __name__ == "__main__":
    sys.exit(main())
