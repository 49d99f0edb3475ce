"""Command-line front end.

Each command writes its artifacts plus ``manifest.json`` (inputs, versions,
status) and ``run.cfg`` (the resolved configuration, reusable through
``--config``) into the output directory. Exit codes: 0 success, 1 solver
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import platform
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .kernels import BACKEND
from .records import write_csv, write_json

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
GRID_POINTS = 1001


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def parse_range(text: str) -> np.ndarray:
    """``"a:b:step"`` (endpoints inclusive up to rounding), ``"a:b"`` (two
    values), a comma list, or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2:
                return np.array(parts)
            if len(parts) != 3:
                raise ValueError
            a, b, step = parts
            if not step > 0 or b < a:
                raise UsageError(f"range {text!r}: need a <= b and step > 0")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            return np.round(a + step * np.arange(count), 12)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}; expected a:b:step, a list or a number") from None


def _pair(text: str) -> tuple[float, float]:
    vals = parse_range(text)
    if vals.size != 2:
        raise UsageError(f"expected two numbers, got {text!r}")
    return float(vals[0]), float(vals[1])


_SAFE_NAMES = {
    "x": None,
    "pi": np.pi,
    "e": np.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "arctan": np.arctan,
}


def parse_potential(expr: str):
    """Compile a potential expression in ``x`` using elementary functions only."""
    try:
        code = compile(expr, "<potential>", "eval")
    except SyntaxError as exc:
        raise UsageError(f"invalid potential expression {expr!r}: {exc.msg}") from None
    bad = sorted(set(code.co_names) - set(_SAFE_NAMES))
    if bad:
        raise UsageError(f"potential uses unknown names: {', '.join(bad)}")
    env = {k: v for k, v in _SAFE_NAMES.items() if k != "x"}

    def V(x):
        x = np.asarray(x, dtype=float)
        # constants broadcast to the shape of x
        return np.zeros_like(x) + eval(code, {"__builtins__": {}}, {**env, "x": x})

    return V


@dataclass(frozen=True)
class Opt:
    name: str
    type: type
    default: object = None
    help: str = ""
    required: bool = False


_PROBLEM = [
    Opt("alpha", float, None, "attractive power", True),
    Opt("beta", float, None, "repulsive power"),
    Opt("mass", float, 1.0, "total mass M"),
    Opt("n", int, 100, "number of basis coefficients"),
    Opt("s", float, 1e-13, "Tikhonov parameter (0: direct solve)"),
    Opt("lambda_policy", str, "auto", "basis policy: auto, alpha or beta"),
    Opt("lam", float, None, "explicit basis parameter"),
]
_COMMON = [
    Opt("output_dir", str, "eqmeasure-out", "directory for artifacts"),
    Opt("workers", int, 1, "worker processes for scans"),
]

COMMANDS = {
    "solve": (
        "single-interval attractive-repulsive equilibrium",
        _PROBLEM
        + [
            Opt("radius", float, None, "fixed radius (skip the search)"),
            Opt("bracket", str, "0.1:5", "radius search range lo:hi"),
            Opt("method", str, "newton-linesearch", "newton-linesearch, golden-section or nelder-mead"),
            Opt("tol_x", float, 1e-10, "radius tolerance"),
            Opt("scan_points", int, 2000, "radii in the bracket scan"),
        ],
    ),
    "solve2": (
        "symmetric two-interval equilibrium",
        _PROBLEM
        + [
            Opt("a", float, None, "inner edge (initial guess, or fixed with --fixed)"),
            Opt("b", float, None, "outer edge (initial guess, or fixed with --fixed)"),
            Opt("fixed", bool, False, "solve on the given (a, b) without searching"),
            Opt("force", bool, False, "search even if one interval is admissible"),
            Opt("window", float, 0.04, "half-width of the local contour around the guess"),
            Opt("grid", int, 17, "cells per side of the local contour"),
        ],
    ),
    "potential": (
        "single interval with an external potential",
        [o for o in _PROBLEM if o.name != "beta"]
        + [
            Opt("potential", str, None, "expression in x, e.g. 'x**2' or '-x**4+sin(x)'", True),
            Opt("kernel_sign", float, None, "sign of the kernel term (default -sign(alpha))"),
            Opt("support", str, "-1:1", "initial support lo:hi"),
        ],
    ),
    "scan-gap": (
        "single-interval admissibility over an (alpha, beta) lattice",
        [
            Opt("alpha", str, None, "range a:b:step", True),
            Opt("beta", str, None, "range a:b:step", True),
            Opt("mass", float, 1.0, "total mass M"),
            Opt("n", int, 50, "number of basis coefficients"),
            Opt("s", float, 1e-13, "Tikhonov parameter"),
            Opt("bracket", str, "0.2:3", "radius search range lo:hi"),
            Opt("scan_points", int, 1200, "radii in each bracket scan"),
        ],
    ),
    "contour": (
        "two-interval energy and min-density over an (a, b) grid",
        _PROBLEM
        + [
            Opt("a", str, None, "inner-edge range a:b:step", True),
            Opt("b", str, None, "outer-edge range a:b:step", True),
        ],
    ),
    "simulate": (
        "overdamped particle simulation",
        [
            Opt("alpha", float, None, "attractive power", True),
            Opt("beta", float, None, "repulsive power", True),
            Opt("n", int, 1000, "number of particles"),
            Opt("steps", int, 10000, "step budget"),
            Opt("dt", float, 0.05, "time step"),
            Opt("seed", int, 0, "RNG seed of the uniform initial state"),
            Opt("tol", float, 1e-10, "stop when a step moves no particle further"),
            Opt("coarse", int, None, "equilibrate this many particles first"),
            Opt("bins", int, 60, "histogram bins"),
        ],
    ),
    "validate": (
        "compare against closed forms or the root-search method",
        list(_PROBLEM)
        + [
            Opt("potential", str, None, "potential expression (root-search cross-check)"),
            Opt("kernel_sign", float, None, "sign of the kernel term"),
            Opt("degree", int, 12, "root-search coefficients"),
            Opt("support", str, "-1:1", "initial support lo:hi"),
        ],
    ),
    "operator": (
        "dump an operator matrix as (row, col, value) triplets",
        [
            Opt("alpha", float, None, "kernel power", True),
            Opt("lam", float, None, "basis parameter (default from alpha)"),
            Opt("size", int, 64, "number of columns"),
            Opt("drop_tol", float, 0.0, "omit entries with smaller magnitude"),
        ],
    ),
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqmeasure", description="Equilibrium measures of power-law interactions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for cmd, (desc, opts) in COMMANDS.items():
        p = sub.add_parser(cmd, help=desc, description=desc)
        p.add_argument("--config", help="flat key = value file; flags take precedence")
        for o in opts + _COMMON:
            kw = {"dest": o.name, "default": None, "help": f"{o.help} (default: {o.default})"}
            if o.type is bool:
                p.add_argument(_flag(o.name), action="store_const", const=True, **kw)
            else:
                p.add_argument(_flag(o.name), type=o.type, metavar=o.name.upper(), **kw)
    return parser


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{num}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _convert(opt: Opt, raw: str):
    if opt.type is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if raw.lower() in ("none", ""):
        return None
    return opt.type(raw)


def parse_config(argv) -> tuple[str, dict]:
    """Resolve ``(command, settings)`` from flags, an optional config file and defaults.

    Raises
    ------
    UsageError
        Unknown keys, type mismatches, missing required values, ``alpha <= beta``.
    """
    parser = build_parser()
    if not argv:
        raise UsageError(parser.format_usage().strip())
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid arguments") from None
    if ns.command is None:
        raise UsageError(parser.format_usage().strip())
    opts = {o.name: o for o in COMMANDS[ns.command][1] + _COMMON}
    values = {k: getattr(ns, k) for k in opts}
    if ns.config:
        cfg = read_config(ns.config)
        unknown = sorted(set(cfg) - set(opts) - {"command"})
        if unknown:
            raise UsageError(f"unknown config keys for {ns.command}: {', '.join(unknown)}")
        if cfg.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for command {cfg['command']!r}, not {ns.command!r}")
        bad = []
        for k, raw in cfg.items():
            if k == "command" or values[k] is not None:
                continue
            try:
                values[k] = _convert(opts[k], raw)
            except ValueError:
                bad.append(f"{k}={raw!r} (expected {opts[k].type.__name__})")
        if bad:
            raise UsageError("type mismatch in config: " + "; ".join(bad))
    for k, o in opts.items():
        if values[k] is None:
            if o.required:
                raise UsageError(f"{ns.command}: missing required option {_flag(k)}")
            values[k] = o.default
    a, b = values.get("alpha"), values.get("beta")
    if isinstance(a, float) and isinstance(b, float) and not a > b:
        raise UsageError(f"need alpha > beta, got alpha={a}, beta={b}")
    return ns.command, values


# ---------------------------------------------------------------- commands


def _spec(cfg: dict, potential=None):
    from .solver import ProblemSpec

    policy = cfg.get("lambda_policy", "auto")
    if policy not in ("auto", "alpha", "beta"):
        raise UsageError(f"lambda policy must be auto, alpha or beta, got {policy!r}")
    kw = dict(
        mass=cfg.get("mass", 1.0),
        n=cfg.get("n", 100),
        tikhonov=cfg.get("s", 1e-13),
        lam=cfg.get("lam"),
        lambda_from=policy,
    )
    if potential is not None:
        return ProblemSpec(cfg["alpha"], potential=potential, kernel_sign=cfg.get("kernel_sign"), potential_name=cfg["potential"], **kw)
    return ProblemSpec(cfg["alpha"], cfg.get("beta"), **kw)


def _write_solution(out: str, sol, files: list, extra: dict | None = None) -> None:
    rec = sol.to_dict()
    rec.update(extra or {})
    rec["admissible"] = bool(sol.admissible)
    rec["mass_check"] = float(sol.mass_check)
    write_json(os.path.join(out, "solution.json"), "solution", rec)
    files.append("solution.json")
    sup = sol.support.as_list()
    lo, hi = min(s[0] for s in sup), max(s[1] for s in sup)
    x = np.linspace(lo, hi, GRID_POINTS)
    with np.errstate(all="ignore"):
        rho = sol.density(x)
    write_csv(os.path.join(out, "density.csv"), "density", [("x", "float"), ("density", "float")], zip(map(float, x), map(float, rho)))
    files.append("density.csv")


def cmd_solve(cfg, out, files):
    from .optimize import OptimizeConfig, optimize_radius
    from .solver import Interval, solve

    spec = _spec(cfg)
    if cfg["radius"] is not None:
        r = cfg["radius"]
        sol = solve(spec, Interval(-r, r))
        _write_solution(out, sol, files, {"radius": r})
        return sol.admissible
    oc = OptimizeConfig(method=cfg["method"], tol_x=cfg["tol_x"], bracket=_pair(cfg["bracket"]), scan_points=cfg["scan_points"])
    sol = optimize_radius(spec, oc)
    curve = sol.diagnostics["curve"]
    write_csv(
        os.path.join(out, "energy_curve.csv"),
        "energy_curve",
        [("radius", "float"), ("energy", "float"), ("gradient", "float"), ("min_density", "float")],
        zip(*(map(float, curve[k]) for k in ("radius", "energy", "gradient", "min_density"))),
    )
    files.append("energy_curve.csv")
    _write_solution(out, sol, files, {"radius": sol.diagnostics["radius"], "candidate_kind": sol.diagnostics["candidate_kind"]})
    return True


def cmd_solve2(cfg, out, files):
    from .optimize import optimize_two_interval
    from .solver import SymmetricPair, solve

    spec = _spec(cfg)
    if spec.beta is None:
        raise UsageError("solve2 needs --beta")
    if cfg["fixed"]:
        if cfg["a"] is None or cfg["b"] is None:
            raise UsageError("--fixed needs --a and --b")
        sol = solve(spec, SymmetricPair(cfg["a"], cfg["b"]))
        _write_solution(out, sol, files)
        return sol.admissible
    init = None if cfg["a"] is None or cfg["b"] is None else (cfg["a"], cfg["b"])
    if init is not None and not init[0] < init[1]:
        raise UsageError("need a < b")
    sol = optimize_two_interval(spec, init=init, window=cfg["window"], grid=cfg["grid"], force=cfg["force"])
    _write_solution(out, sol, files, {"verdict": sol.diagnostics["verdict"]})
    return True


def cmd_potential(cfg, out, files):
    from .optimize import optimize_interval

    spec = _spec(cfg, parse_potential(cfg["potential"]))
    sol = optimize_interval(spec, init=_pair(cfg["support"]))
    _write_solution(out, sol, files, {"potential": cfg["potential"]})
    return True


def cmd_scan_gap(cfg, out, files):
    from .optimize import OptimizeConfig, gap_scan

    A, B = parse_range(cfg["alpha"]), parse_range(cfg["beta"])
    oc = OptimizeConfig(scan_points=cfg["scan_points"], bracket=_pair(cfg["bracket"]))
    res = gap_scan(A, B, {"mass": cfg["mass"], "n": cfg["n"], "tikhonov": cfg["s"]}, oc, workers=cfg["workers"])
    write_csv(
        os.path.join(out, "gap_scan.csv"),
        "gap_scan",
        [("alpha", "float"), ("beta", "float"), ("radius", "float"), ("energy", "float"), ("min_density", "float"), ("admissible", "bool")],
        res.rows(),
    )
    rows = [(k, float(a), float(b)) for k, line in enumerate(res.boundary) for a, b in line]
    write_csv(os.path.join(out, "boundary.csv"), "gap_boundary", [("segment", "int"), ("alpha", "float"), ("beta", "float")], rows)
    write_json(
        os.path.join(out, "boundary.json"),
        "gap_boundary",
        {"polylines": res.boundary, "failures": [{"alpha": a, "beta": b, "error": e} for (a, b), e in sorted(res.failures.items())]},
    )
    files += ["gap_scan.csv", "boundary.csv", "boundary.json"]
    return True


def cmd_contour(cfg, out, files):
    from .optimize import energy_contour

    spec = _spec(cfg)
    res = energy_contour(spec, parse_range(cfg["a"]), parse_range(cfg["b"]), workers=cfg["workers"])
    adm = res.admissible
    rows = (
        (float(a), float(b), float(res.energy[i, j]), float(res.min_density[i, j]), bool(adm[i, j]))
        for i, a in enumerate(res.a)
        for j, b in enumerate(res.b)
    )
    write_csv(
        os.path.join(out, "contour.csv"),
        "contour",
        [("a", "float"), ("b", "float"), ("energy", "float"), ("min_density", "float"), ("admissible", "bool")],
        rows,
    )
    files.append("contour.csv")
    return True


def cmd_simulate(cfg, out, files):
    from .validation import particle_simulate

    st = particle_simulate(
        cfg["alpha"], cfg["beta"], cfg["n"], cfg["steps"], cfg["dt"], seed=cfg["seed"], tol=cfg["tol"], coarse=cfg["coarse"]
    )
    x = np.sort(st.positions)
    write_csv(os.path.join(out, "particles.csv"), "particles", [("index", "int"), ("x", "float")], enumerate(map(float, x)))
    counts, edges = np.histogram(x, bins=cfg["bins"])
    dens = counts / (x.size * np.diff(edges))
    write_csv(
        os.path.join(out, "histogram.csv"),
        "histogram",
        [("left", "float"), ("right", "float"), ("count", "int"), ("density", "float")],
        zip(map(float, edges[:-1]), map(float, edges[1:]), map(int, counts), map(float, dens)),
    )
    write_json(
        os.path.join(out, "simulation.json"),
        "simulation",
        {"iterations": st.iteration, "converged": st.converged, "max_displacement": st.max_displacement, "jitter_events": st.jitter_events},
    )
    files += ["particles.csv", "histogram.csv", "simulation.json"]
    return True


def cmd_validate(cfg, out, files):
    from .optimize import optimize_interval, optimize_radius
    from .validation import analytic_solution, root_search_measure

    if cfg["potential"]:
        spec = _spec(cfg, parse_potential(cfg["potential"]))
        init = _pair(cfg["support"])
        sol = optimize_interval(spec, init=init)
        rs = root_search_measure(spec, cfg["degree"], init=init)
        (a, b), = sol.support.as_list()
        x = np.linspace(a, b, GRID_POINTS)[1:-1]
        core = np.abs(x - 0.5 * (a + b)) <= 0.45 * (b - a)
        metrics = {
            "method": "root-search",
            "support_spectral": [a, b],
            "support_root_search": rs.support.as_list()[0],
            "support_difference": max(abs(a - rs.support.a), abs(b - rs.support.b)),
            "density_difference": float(np.max(np.abs(sol.density(x[core]) - rs.measure(x[core])))),
        }
    else:
        if cfg["beta"] is None:
            raise UsageError("validate needs --beta or --potential")
        ref = analytic_solution(cfg["alpha"], cfg["beta"], cfg["mass"])
        sol = optimize_radius(_spec(cfg))
        R = sol.diagnostics["radius"]
        x = np.linspace(-0.99, 0.99, GRID_POINTS) * ref.radius
        metrics = {
            "method": "closed-form",
            "family": ref.family,
            "radius": R,
            "radius_reference": ref.radius,
            "radius_difference": abs(R - ref.radius),
            "density_difference": float(np.max(np.abs(sol.density(x) - ref.density(x)))),
            "mass_difference": abs(sol.mass_check - cfg["mass"]),
        }
    write_json(os.path.join(out, "validation.json"), "validation", metrics)
    files.append("validation.json")
    return True


def cmd_operator(cfg, out, files):
    from .operators import build_operator, write_triplets

    op = build_operator(cfg["alpha"], cfg["lam"], cfg["size"])
    write_triplets(op, os.path.join(out, "triplets.csv"), cfg["drop_tol"])
    files.append("triplets.csv")
    return True


HANDLERS = {
    "solve": cmd_solve,
    "solve2": cmd_solve2,
    "potential": cmd_potential,
    "scan-gap": cmd_scan_gap,
    "contour": cmd_contour,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "operator": cmd_operator,
}


def _write_manifest(out, command, cfg, files, status, error=None):
    write_json(
        os.path.join(out, "manifest.json"),
        "manifest",
        {
            "command": command,
            "config": cfg,
            "version": __version__,
            "backend": BACKEND,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "status": status,
            "error": error,
            "outputs": files,
        },
    )
    with open(os.path.join(out, "run.cfg"), "w") as fh:
        fh.write(f"# eqmeasure {__version__} resolved configuration\n")
        fh.write(f"command = {command}\n")
        for k in sorted(cfg):
            if k != "output_dir" and cfg[k] is not None:
                fh.write(f"{k} = {cfg[k]}\n")


def run(command: str, cfg: dict) -> int:
    """Execute one command; returns the exit status."""
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    files: list[str] = []
    try:
        HANDLERS[command](cfg, out, files)
    except UsageError:
        raise
    except Exception as exc:  # solver failures become exit status 1
        msg = f"{type(exc).__name__}: {exc}"
        _write_manifest(out, command, cfg, files, "failed", msg)
        print(f"eqmeasure {command}: failed: {msg}", file=sys.stderr)
        if files:
            print(f"partial outputs in {out}: {', '.join(files)}", file=sys.stderr)
        return EXIT_FAILURE
    _write_manifest(out, command, cfg, files, "ok")
    print(f"eqmeasure {command}: wrote {', '.join(files)} to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, cfg = parse_config(argv)
        return run(command, cfg)
    except UsageError as exc:
        print(f"eqmeasure: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
