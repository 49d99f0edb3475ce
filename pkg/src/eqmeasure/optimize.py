"""Searches over support boundaries.

Single interval: the equilibrium radius of an attractive-repulsive problem is
a local minimizer of the normalization energy ``E(R) = M / int(rho~/E)``
restricted to radii with a nonnegative density. Candidates are interior
stationary points of ``E`` and points where the positivity constraint
becomes active while ``E`` still decreases; a scan over the radius bracket
finds them and a one-dimensional refinement polishes them.

The derivative of ``E`` is analytic: with ``F(h) = sum_p c_p h^(p+1) Q_p``
and ``raw`` the (regularized) solution of ``F raw = e_0``, differentiating
the linear system gives ``d raw`` without extra factorizations of note.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .solver import (
    POSITIVITY_TOL,
    Interval,
    ProblemSpec,
    SymmetricPair,
    _min_density,
    near_operator,
    solve,
)
from .ultraspherical import synthesize, weight_integral

METHODS = ("newton-linesearch", "golden-section", "nelder-mead")


class NoAdmissibleMeasureError(RuntimeError):
    """No positive measure in the searched range; ``curve`` holds the samples."""

    def __init__(self, message: str, curve: dict | None = None):
        super().__init__(message)
        self.curve = curve or {}


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeConfig:
    """Settings for the support searches.

    Parameters
    ----------
    method : {"newton-linesearch", "golden-section", "nelder-mead"}
        Refinement of a bracketed radius; ``optimize_interval`` always uses
        Nelder-Mead.
    tol_x, tol_f : float
        Tolerances on the boundary position and the energy.
    max_iter : int
    penalty_weight : float
        Weight ``w`` of ``E + w * max(0, -min_density)^2``.
    bracket : (float, float)
        Radius search range.
    scan_points : int
        Radii in the geometric scan of the bracket.
    warm_start : bool
        Add the closed-form radius to the scan when one is known.
    """

    method: str = "newton-linesearch"
    tol_x: float = 1e-10
    tol_f: float = 1e-14
    max_iter: int = 200
    penalty_weight: float = 1e4
    bracket: tuple = (0.1, 5.0)
    scan_points: int = 2000
    warm_start: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not (self.tol_x > 0 and self.tol_f > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.scan_points < 4:
            raise ValueError("max_iter and scan_points must be positive")
        lo, hi = self.bracket
        if not 0 < lo < hi:
            raise ValueError("bracket must satisfy 0 < lo < hi")


@dataclass
class GapScanResult:
    """Single-interval admissibility over an ``(alpha, beta)`` lattice.

    ``min_density[i, j]`` belongs to ``(alphas[i], betas[j])``; NaN marks
    failed or invalid cells, whose messages are in ``failures``.
    """

    alphas: np.ndarray
    betas: np.ndarray
    radius: np.ndarray
    energy: np.ndarray
    min_density: np.ndarray
    boundary: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                md = self.min_density[i, j]
                yield (
                    float(a),
                    float(b),
                    float(self.radius[i, j]),
                    float(self.energy[i, j]),
                    float(md),
                    bool(md >= POSITIVITY_TOL) if math.isfinite(md) else False,
                )

    def crossings(self, alpha: float) -> list[float]:
        """Admissibility changes along one alpha row, linearly interpolated.

        Cells are classified with the positivity tolerance, so vanishing-edge
        cells at rounding level count as admissible.
        """
        i = int(np.argmin(np.abs(self.alphas - alpha)))
        md = self.min_density[i]
        out = []
        for j in range(len(self.betas) - 1):
            u, v = md[j], md[j + 1]
            if not (math.isfinite(u) and math.isfinite(v)):
                continue
            if (u >= POSITIVITY_TOL) != (v >= POSITIVITY_TOL):
                b0, b1 = self.betas[j], self.betas[j + 1]
                out.append(float(b0 + (b1 - b0) * (u - POSITIVITY_TOL) / (u - v)))
        return out


@dataclass
class EnergyContour:
    """Two-interval solves on an ``(a, b)`` grid; NaN marks skipped or failed cells."""

    a: np.ndarray
    b: np.ndarray
    energy: np.ndarray
    min_density: np.ndarray
    failures: dict = field(default_factory=dict)

    @property
    def admissible(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.isfinite(self.min_density) & (self.min_density >= POSITIVITY_TOL)

    def best(self):
        """``(a, b, E)`` of the lowest-energy admissible cell, or ``None``."""
        mask = self.admissible
        if not mask.any():
            return None
        E = np.where(mask, self.energy, np.inf)
        i, j = np.unravel_index(np.argmin(E), E.shape)
        return float(self.a[i]), float(self.b[j]), float(E[i, j])


def closed_form_radius(spec: ProblemSpec) -> float | None:
    """Radius of the known exact solutions (one power equal to 2), else ``None``."""
    if spec.potential is not None or spec.beta is None:
        return None
    a, b = spec.alpha, spec.beta
    try:
        if b == 2.0 and 2.0 < a < 3.0:
            base = -math.cos(a * math.pi / 2) / (math.pi * (a - 1)) * _beta(0.5, (3 - a) / 2)
            r = base ** (1.0 / (a - 2))
        elif a == 2.0 and b < 2.0 and b != 1.0:
            base = math.cos((2 - b) * math.pi / 2) / ((b - 1) * math.pi) * _beta(0.5, (3 - b) / 2)
            r = base ** (1.0 / (b - 2))
        else:
            return None
    except (ValueError, ZeroDivisionError):
        return None
    return r if math.isfinite(r) and r > 0 else None


def _beta(x: float, y: float) -> float:
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def normalization_energy(spec: ProblemSpec, radius: float, grad: bool = True):
    """``E(R)`` on ``[-R, R]`` and its derivative, plus the min-density.

    Returns ``(E, dE/dR, min_density)``; the derivative is ``nan`` when
    ``grad`` is false.
    """
    n, lam, h = spec.n, spec.basis, float(radius)
    F = np.zeros((n, n))
    dF = np.zeros((n, n))
    for p, c in spec.powers():
        Q = near_operator(p, lam, n).square(n)
        F += (c * h ** (p + 1.0)) * Q
        if grad:
            dF += (c * (p + 1.0) * h**p) * Q
    s = spec.tikhonov
    if s > 0:
        G = F.T @ F
        G[np.diag_indices_from(G)] += s
        cho = linalg.cho_factor(G)
        raw = linalg.cho_solve(cho, F[0])
        if grad:
            draw = linalg.cho_solve(cho, dF[0] - (dF.T @ (F @ raw) + F.T @ (dF @ raw)))
    else:
        lu = linalg.lu_factor(F)
        e0 = np.zeros(n)
        e0[0] = 1.0
        raw = linalg.lu_solve(lu, e0)
        if grad:
            draw = -linalg.lu_solve(lu, dF @ raw)
    W = weight_integral(lam)
    integral = h * W * raw[0]
    E = spec.mass / integral
    dE = -spec.mass * (W * raw[0] + h * W * draw[0]) / integral**2 if grad else math.nan
    return float(E), float(dE), _min_density(lam, E * raw)


def _orientation(spec: ProblemSpec) -> float:
    # negating both kernel and potential leaves rho unchanged; minimize the
    # energy of the orientation with a repulsive kernel term
    return -spec.sign if spec.potential is not None else 1.0


def _potential_profile(spec: ProblemSpec, radius: float, grad: bool = True):
    def f(r):
        return _orientation(spec) * solve(spec, Interval(-r, r)).energy

    sol = solve(spec, Interval(-radius, radius))
    E = _orientation(spec) * sol.energy
    if not grad:
        return E, math.nan, sol.min_density
    d = 1e-6 * max(1.0, radius)
    return E, (f(radius + d) - f(radius - d)) / (2 * d), sol.min_density


def _profile(spec: ProblemSpec):
    if spec.potential is not None:
        return lambda r, grad=True: _potential_profile(spec, r, grad)
    return lambda r, grad=True: normalization_energy(spec, r, grad)


def _safe_newton(g, lo: float, hi: float, glo: float, ghi: float, cfg: OptimizeConfig) -> float:
    """Root of the gradient in ``[lo, hi]``: Newton steps with a finite-difference
    Hessian, falling back to bisection whenever a step leaves the bracket or
    fails to halve ``|g|``."""
    x = 0.5 * (lo + hi)
    gx = g(x)
    for _ in range(cfg.max_iter):
        if gx == 0.0 or hi - lo <= cfg.tol_x:
            return x
        if (gx < 0) == (glo < 0):
            lo, glo = x, gx
        else:
            hi, ghi = x, gx
        d = 1e-6 * max(1.0, abs(x))
        hess = (g(x + d) - g(x - d)) / (2 * d)
        step = -gx / hess if hess != 0 and math.isfinite(hess) else math.nan
        xn = x + step
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        gn = g(xn)
        if abs(gn) > 0.5 * abs(gx) and math.isfinite(step):
            xb = 0.5 * (lo + hi)
            gb = g(xb)
            if abs(gb) < abs(gn):
                xn, gn = xb, gb
        if abs(xn - x) <= cfg.tol_x:
            return xn
        x, gx = xn, gn
    return x


def _refine(prof, lo, hi, glo, ghi, cfg: OptimizeConfig) -> float:
    w = cfg.penalty_weight

    def penalized(r):
        E, _, m = prof(r, grad=False)
        return E + w * max(0.0, -m) ** 2

    if cfg.method == "newton-linesearch":
        return _safe_newton(lambda r: prof(r)[1], lo, hi, glo, ghi, cfg)
    if cfg.method == "golden-section":
        res = optimize.minimize_scalar(
            penalized, bounds=(lo, hi), method="bounded", options={"xatol": cfg.tol_x, "maxiter": cfg.max_iter}
        )
        return float(res.x)
    res = optimize.minimize(
        lambda v: penalized(float(v[0])) if lo <= v[0] <= hi else math.inf,
        [0.5 * (lo + hi)],
        method="Nelder-Mead",
        options={"xatol": cfg.tol_x, "fatol": cfg.tol_f, "maxiter": cfg.max_iter, "initial_simplex": [[lo], [hi]]},
    )
    return float(res.x[0])


def _boundary_root(prof, lo: float, hi: float, feasible_lo: bool, cfg: OptimizeConfig) -> float:
    r = optimize.brentq(lambda x: prof(x, grad=False)[2], lo, hi, xtol=cfg.tol_x * 1e-2, rtol=4 * np.finfo(float).eps)
    # step onto the feasible side if the root landed just outside
    step = (lo - r) if feasible_lo else (hi - r)
    for frac in (0.0, 1e-6, 1e-4, 1e-2):
        x = r + frac * step
        if prof(x, grad=False)[2] >= POSITIVITY_TOL:
            return x
    return lo if feasible_lo else hi


def radius_candidates(spec: ProblemSpec, config: OptimizeConfig | None = None):
    """Scan the bracket and refine every local-minimum candidate.

    Returns ``(candidates, curve)``: a list of ``(radius, kind)`` with kind
    ``"interior"`` or ``"boundary"``, and the sampled ``{radius, energy,
    gradient, min_density}`` arrays.
    """
    cfg = config or OptimizeConfig()
    prof = _profile(spec)
    lo, hi = cfg.bracket
    Rs = np.geomspace(lo, hi, cfg.scan_points)
    warm = closed_form_radius(spec) if cfg.warm_start else None
    if warm is not None and lo < warm < hi:
        Rs = np.unique(np.concatenate([Rs, [warm * (1 - 1e-7), warm * (1 + 1e-7)]]))
    vals = np.array([prof(r) for r in Rs])
    E, g, m = vals[:, 0], vals[:, 1], vals[:, 2]
    curve = {"radius": Rs, "energy": E, "gradient": g, "min_density": m}
    feas = m >= POSITIVITY_TOL
    cands = []
    for i in range(len(Rs) - 1):
        if not (np.isfinite(g[i]) and np.isfinite(g[i + 1])):
            continue
        if g[i] < 0 <= g[i + 1]:
            cands.append((_refine(prof, Rs[i], Rs[i + 1], g[i], g[i + 1], cfg), "interior"))
        # degenerate stationary points sit on the constraint, so noise-level
        # gradients of either sign must not hide the boundary candidate
        gtol = 1e-10 * max(1.0, abs(E[i])) / Rs[i]
        if feas[i] and not feas[i + 1] and not (g[i] > gtol and g[i + 1] > gtol):
            cands.append((_boundary_root(prof, Rs[i], Rs[i + 1], True, cfg), "boundary"))
        if not feas[i] and feas[i + 1] and not (g[i] < -gtol and g[i + 1] < -gtol):
            cands.append((_boundary_root(prof, Rs[i], Rs[i + 1], False, cfg), "boundary"))
    return cands, curve


def optimize_radius(spec: ProblemSpec, config: OptimizeConfig | None = None, require_admissible: bool = True):
    """Equilibrium radius of a symmetric single-interval problem.

    Parameters
    ----------
    spec : ProblemSpec
        Attractive-repulsive, or a potential problem with even ``V``.
    config : OptimizeConfig, optional
    require_admissible : bool
        If false, return the candidate closest to admissibility instead of
        raising; gap scans use this to read the min-density off the optimum.

    Returns
    -------
    EquilibriumSolution
        ``diagnostics`` gains ``radius``, ``candidate_kind``, ``candidates``
        (all refined radii) and ``curve`` (the scan samples).

    Raises
    ------
    NoAdmissibleMeasureError
        With the scanned energy curve attached.
    """
    cfg = config or OptimizeConfig()
    if spec.potential is not None:
        probe = np.linspace(0.1, 1.0, 7)
        V = np.asarray(spec.potential(probe), dtype=float)
        Vm = np.asarray(spec.potential(-probe), dtype=float)
        if np.max(np.abs(V - Vm)) > 1e-12 * max(1.0, float(np.max(np.abs(V)))):
            raise ValueError("optimize_radius needs an even potential; use optimize_interval")
    cands, curve = radius_candidates(spec, cfg)
    prof = _profile(spec)
    scored = []
    for r, kind in cands:
        sol = solve(spec, Interval(-r, r))
        E = prof(r, grad=False)[0]
        scored.append((r, kind, E, sol))
    adm = [c for c in scored if c[3].admissible]
    if adm:
        emin = min(c[2] for c in adm)
        close = [c for c in adm if c[2] - emin <= cfg.tol_f * max(1.0, abs(emin))]
        # near-ties arise at degenerate stationary points; the constraint root is exact there
        close.sort(key=lambda c: (c[1] != "boundary", c[2]))
        best = close[0]
    elif require_admissible or not scored:
        if not scored and not require_admissible:
            i = int(np.argmax(curve["min_density"]))
            r = float(curve["radius"][i])
            best = (r, "scan", curve["energy"][i], solve(spec, Interval(-r, r)))
        else:
            raise NoAdmissibleMeasureError(
                f"no admissible single-interval measure for radii in {cfg.bracket}", curve
            )
    else:
        best = max(scored, key=lambda c: c[3].min_density)
    r, kind, _, sol = best
    sol.diagnostics.update(
        {"radius": float(r), "candidate_kind": kind, "candidates": [float(c[0]) for c in scored], "curve": curve}
    )
    return sol


def optimize_interval(spec: ProblemSpec, config: OptimizeConfig | None = None, init=(-1.0, 1.0), polish: bool = True):
    """Support ``[a, b]`` of a problem with an external potential.

    Nelder-Mead over ``(a, b)`` on ``orientation * E + w max(0, -min_density)^2``.
    At the optimum the density vanishes at both edges, so the simplex result
    is polished by solving for zero edge values of the polynomial factor;
    the polish is kept only if it moves the edges by less than ``1e-3`` of
    the width and stays admissible.

    Raises
    ------
    ValueError
        If the initial interval is degenerate or ``V`` is missing.
    OptimizationError
        If the simplex collapses without convergence.
    """
    cfg = config or OptimizeConfig()
    if spec.potential is None:
        raise ValueError("optimize_interval needs an external potential")
    a0, b0 = map(float, init)
    if not a0 < b0:
        raise ValueError(f"degenerate initial interval ({a0}, {b0})")
    sgn = _orientation(spec)
    w = cfg.penalty_weight

    def phi(v):
        a, b = v
        if not b - a > 1e-8:
            return math.inf
        try:
            sol = solve(spec, Interval(a, b))
        except (ArithmeticError, ValueError):
            return math.inf
        return sgn * sol.energy + w * max(0.0, -sol.min_density) ** 2

    res = optimize.minimize(
        phi,
        [a0, b0],
        method="Nelder-Mead",
        options={"xatol": cfg.tol_x, "fatol": cfg.tol_f, "maxiter": 400 * max(1, cfg.max_iter // 50)},
    )
    a, b = map(float, res.x)
    if not (math.isfinite(res.fun) and b > a):
        raise OptimizationError(f"simplex collapsed without convergence: {res.message}")
    if polish:
        a, b = _polish_edges(spec, a, b)
    sol = solve(spec, Interval(a, b))
    sol.diagnostics.update({"support": [a, b], "simplex_iterations": int(res.nit), "simplex_success": bool(res.success)})
    return sol


def edge_values(spec: ProblemSpec, a: float, b: float) -> np.ndarray:
    """Polynomial factor of the density at both edges of ``[a, b]``."""
    sol = solve(spec, Interval(a, b))
    return synthesize(sol.coeffs, sol.lam, np.array([-1.0, 1.0]))


def _polish_edges(spec: ProblemSpec, a: float, b: float):
    width = b - a
    try:
        res = optimize.root(lambda v: edge_values(spec, *v), [a, b], method="hybr", options={"xtol": 1e-14})
    except (ArithmeticError, ValueError):
        return a, b
    a1, b1 = map(float, res.x)
    converged = res.success or float(np.max(np.abs(res.fun))) <= 1e-12
    if converged and b1 > a1 and abs(a1 - a) + abs(b1 - b) < 1e-3 * width:
        if solve(spec, Interval(a1, b1)).min_density >= POSITIVITY_TOL:
            return a1, b1
    return a, b


def _contour_cell(args):
    spec, a, b = args
    if not 0 < a < b:
        return math.nan, math.nan, None
    try:
        sol = solve(spec, SymmetricPair(a, b))
        return sol.diagnostics["E_normalization"], sol.min_density, None
    except Exception as exc:  # recorded per cell, never fatal
        return math.nan, math.nan, f"{type(exc).__name__}: {exc}"


def _pool_map(fn, jobs, workers: int):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(j) for j in jobs]


def energy_contour(spec: ProblemSpec, a_range, b_range, workers: int = 1) -> EnergyContour:
    """Normalization energy and min-density of two-interval solves on a grid.

    ``a_range`` and ``b_range`` are arrays of inner and outer edges; cells
    with ``a >= b`` are skipped.
    """
    A = np.asarray(a_range, dtype=float)
    B = np.asarray(b_range, dtype=float)
    if np.any(A <= 0) or np.any(B <= 0):
        raise ValueError("contour ranges must be positive")
    jobs = [(spec, a, b) for a in A for b in B]
    out = _pool_map(_contour_cell, jobs, workers)
    E = np.array([o[0] for o in out]).reshape(A.size, B.size)
    md = np.array([o[1] for o in out]).reshape(A.size, B.size)
    fails = {(float(j[1]), float(j[2])): o[2] for j, o in zip(jobs, out) if o[2]}
    return EnergyContour(A, B, E, md, fails)


def optimize_two_interval(
    spec: ProblemSpec,
    config: OptimizeConfig | None = None,
    init=None,
    window: float = 0.04,
    grid: int = 17,
    force: bool = False,
    a_floor: float = 1e-3,
):
    """Symmetric two-interval support ``[-b, -a] U [a, b]``.

    The admissible set is a thin region around the consistent support, so
    the search first evaluates a local contour of ``grid x grid`` cells of
    half-width ``window`` around ``init`` (from a particle simulation when
    not given), then runs Nelder-Mead on the penalized energy from the best
    admissible cell. The returned point is the lowest-energy admissible
    support evaluated along the way.

    Raises
    ------
    ValueError
        If ``init`` has ``a >= b``, or if the single interval is admissible
        and ``force`` is false.
    NoAdmissibleMeasureError
        If no admissible cell is found near the initial guess.
    """
    cfg = config or OptimizeConfig()
    if spec.potential is not None or spec.beta is None:
        raise ValueError("two-interval supports need an attractive-repulsive kernel")
    if not force:
        single = optimize_radius(spec, cfg, require_admissible=False)
        if single.admissible:
            raise ValueError("single-interval solution is admissible; pass force=True to search two intervals")
    if init is None:
        from .validation import particle_support_guess

        init = particle_support_guess(spec.alpha, spec.beta)
    a0, b0 = map(float, init)
    if not 0 <= a0 < b0:
        raise ValueError(f"need 0 <= a < b, got a={a0}, b={b0}")
    A = np.linspace(max(a_floor, a0 - window), a0 + window, grid)
    B = np.linspace(max(a_floor * 2, b0 - window), b0 + window, grid)
    cont = energy_contour(spec, A, B)
    start = cont.best()
    if start is None:
        raise NoAdmissibleMeasureError(
            f"no admissible two-interval measure near a={a0:.4g}, b={b0:.4g}",
            {"a": A, "b": B, "energy": cont.energy, "min_density": cont.min_density},
        )
    best = {"x": (start[0], start[1]), "E": start[2]}
    w = cfg.penalty_weight

    def phi(v):
        a, b = map(float, v)
        if not 0 < a < b:
            return math.inf
        try:
            sol = solve(spec, SymmetricPair(a, b))
        except Exception:
            return math.inf
        E, m = sol.diagnostics["E_normalization"], sol.min_density
        if m >= POSITIVITY_TOL and E < best["E"]:
            best.update(x=(a, b), E=E)
        return E + w * max(0.0, -m) ** 2

    step = 0.25 * (A[1] - A[0])
    simplex = [[start[0], start[1]], [start[0] + step, start[1]], [start[0], start[1] + step]]
    optimize.minimize(
        phi,
        simplex[0],
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": cfg.tol_f, "maxiter": cfg.max_iter, "initial_simplex": simplex},
    )
    a, b = best["x"]
    sol = solve(spec, SymmetricPair(a, b))
    near_zero = a <= A[0] + (A[1] - A[0])
    sol.diagnostics.update(
        {
            "support": [a, b],
            "initial_guess": [a0, b0],
            "admissible_cells": int(cont.admissible.sum()),
            "inner_edge_at_floor": bool(near_zero),
            "verdict": "single interval likely admissible" if near_zero else "two intervals",
        }
    )
    return sol


def _gap_cell(args):
    spec, cfg = args
    try:
        sol = optimize_radius(spec, cfg, require_admissible=False)
        return sol.diagnostics["radius"], sol.diagnostics["E_normalization"], sol.min_density, None
    except Exception as exc:  # recorded per cell, never fatal
        return math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}"


def gap_scan(alphas, betas, spec_defaults: dict | None = None, config: OptimizeConfig | None = None, workers: int = 1):
    """Min-density at the single-interval optimum over an ``(alpha, beta)`` lattice.

    Cells with ``alpha <= beta`` are marked invalid. The boundary is the
    level set ``min_density = POSITIVITY_TOL`` (marching squares), as a list
    of ``(alpha, beta)`` polylines.
    """
    A = np.atleast_1d(np.asarray(alphas, dtype=float))
    B = np.atleast_1d(np.asarray(betas, dtype=float))
    cfg = config or OptimizeConfig(scan_points=1200, bracket=(0.2, 3.0))
    base = dict(spec_defaults or {})
    jobs, index, fails = [], [], {}
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            if not a > b:
                fails[(float(a), float(b))] = "alpha must exceed beta"
                continue
            try:
                jobs.append((ProblemSpec(float(a), float(b), **base), cfg))
                index.append((i, j))
            except ValueError as exc:
                fails[(float(a), float(b))] = str(exc)
    out = _pool_map(_gap_cell, jobs, workers)
    shape = (A.size, B.size)
    R, E, md = (np.full(shape, np.nan) for _ in range(3))
    for (i, j), (r, e, m, err) in zip(index, out):
        R[i, j], E[i, j], md[i, j] = r, e, m
        if err:
            fails[(float(A[i]), float(B[j]))] = err
    return GapScanResult(A, B, R, E, md, _zero_contour(A, B, md), fails)


def _zero_contour(A, B, field_):
    if A.size < 2 or B.size < 2:
        return []
    from skimage import measure

    lines = []
    for path in measure.find_contours(field_, POSITIVITY_TOL):
        ai = np.interp(path[:, 0], np.arange(A.size), A)
        bj = np.interp(path[:, 1], np.arange(B.size), B)
        lines.append([(float(x), float(y)) for x, y in zip(ai, bj)])
    return lines


__all__ = [
    "EnergyContour",
    "GapScanResult",
    "NoAdmissibleMeasureError",
    "OptimizationError",
    "OptimizeConfig",
    "closed_form_radius",
    "edge_values",
    "energy_contour",
    "gap_scan",
    "normalization_energy",
    "optimize_interval",
    "optimize_radius",
    "optimize_two_interval",
    "radius_candidates",
]
