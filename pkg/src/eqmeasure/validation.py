"""Independent checks: closed-form measures, particle dynamics, an alternative
root-search solver and coefficient diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .kernels import pairwise_force
from .optimize import closed_form_radius
from .solver import EquilibriumSolution, Interval, ProblemSpec, SymmetricPair, near_operator, solve
from .ultraspherical import WeightedExpansion, eval_poly, synthesize, weight_integral


class UnsupportedParametersError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalyticSolution:
    """Closed-form measure ``c (b^2 - x^2)^((1-p)/2)`` on ``(-b, b)``.

    ``family`` is ``"alpha"`` when ``beta = 2`` (``p = alpha``) and ``"beta"``
    when ``alpha = 2`` (``p = beta``).
    """

    family: str
    alpha: float
    beta: float
    mass: float
    radius: float
    power: float

    @property
    def prefactor(self) -> float:
        p = self.power
        return -self.mass * math.cos(p * math.pi / 2) / ((p - 1) * math.pi)

    @property
    def exponent(self) -> float:
        return (1.0 - self.power) / 2.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        b = self.radius
        inside = np.abs(x) < b
        out = np.zeros_like(x)
        out[inside] = self.prefactor * (b * b - x[inside] ** 2) ** self.exponent
        return out

    def cdf(self, x):
        """Cumulative mass from ``-b``."""
        x = np.clip(np.asarray(x, dtype=float), -self.radius, self.radius)
        g = self.exponent + 1.0
        return self.mass * special.betainc(g, g, (x + self.radius) / (2 * self.radius))


def analytic_solution(alpha: float, beta: float, mass: float = 1.0) -> AnalyticSolution:
    """Exact equilibrium of the two families with one power equal to 2.

    Raises
    ------
    UnsupportedParametersError
        For pairs outside ``beta = 2, 2 < alpha < 3`` and ``alpha = 2, -1 < beta < 2, beta != 1``.
    """
    try:
        spec = ProblemSpec(float(alpha), float(beta), mass=float(mass))
    except ValueError as exc:
        raise UnsupportedParametersError(str(exc)) from exc
    R = closed_form_radius(spec)
    if R is None:
        raise UnsupportedParametersError(f"no closed form for (alpha, beta) = ({alpha}, {beta})")
    if beta == 2.0:
        return AnalyticSolution("alpha", alpha, beta, mass, R, alpha)
    return AnalyticSolution("beta", alpha, beta, mass, R, beta)


def measure_cdf(measure, x):
    """Cumulative mass of a :class:`WeightedExpansion` (or a tuple of them) at ``x``.

    Exact: ``int_{-1}^{t} w C_n = -(2 lam / (n (n + 2 lam))) (1-t^2)^(lam+1/2) C_{n-1}^(lam+1)(t)``
    for ``n >= 1`` and a regularized incomplete beta function for ``n = 0``.
    """
    if isinstance(measure, tuple):
        return sum(measure_cdf(m, x) for m in measure)
    x = np.asarray(x, dtype=float)
    lam = measure.lam
    a, b = measure.support
    h = 0.5 * (b - a)
    t = np.clip((x - 0.5 * (a + b)) / h, -1.0, 1.0)
    c = np.asarray(measure.coeffs, dtype=float)
    out = c[0] * weight_integral(lam) * special.betainc(lam + 0.5, lam + 0.5, (1.0 + t) / 2.0)
    lift = (1.0 - t * t) ** (lam + 0.5)
    for n in range(1, c.size):
        if c[n] != 0.0:
            out = out - c[n] * (2 * lam / (n * (n + 2 * lam))) * lift * eval_poly(n - 1, lam + 1, t)
    return h * out


@dataclass
class ParticleState:
    """Particle positions after an overdamped run."""

    positions: np.ndarray
    step: float
    iteration: int
    converged: bool = False
    max_displacement: float = math.inf
    jitter_events: int = 0
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.size < 2 or not np.all(np.isfinite(self.positions)):
            raise ValueError("a particle state needs at least two finite positions")

    @property
    def n(self) -> int:
        return self.positions.size

    def centered(self) -> np.ndarray:
        return self.positions - self.positions.mean()


def _upsample(sorted_x: np.ndarray, n: int) -> np.ndarray:
    q = np.linspace(0.0, 1.0, sorted_x.size)
    return np.interp(np.linspace(0.0, 1.0, n), q, sorted_x)


def particle_simulate(
    alpha: float,
    beta: float,
    n: int = 1000,
    steps: int = 10000,
    dt: float = 0.05,
    init="uniform",
    seed: int = 0,
    tol: float = 1e-10,
    coarse: int | None = None,
    coarse_steps: int = 20000,
) -> ParticleState:
    """Overdamped gradient flow ``x_i <- x_i - dt (1/N) sum_j K'(x_i - x_j)``.

    Parameters
    ----------
    alpha, beta : float
        ``K'(r) = sign(r) (|r|^(alpha-1) - |r|^(beta-1))``.
    n : int
    steps : int
        Step budget of the final stage.
    dt : float
    init : "uniform" or array
        Uniform on ``(-1, 1)`` from ``seed``, or explicit positions.
    seed : int
    tol : float
        Stop once the largest displacement of a step is below ``tol``.
    coarse : int, optional
        Equilibrate ``coarse`` particles first (same initial law) and start
        from their quantile interpolation; the mean-field limit makes the
        coarse steady state a close initial guess.
    coarse_steps : int
        Step budget of the coarse stage, which stops at ``max(tol, 1e-8)``.

    Returns
    -------
    ParticleState
    """
    if n < 2:
        raise ValueError("need at least two particles")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not alpha > beta:
        raise ValueError("need alpha > beta")
    rng = np.random.default_rng(seed)
    if isinstance(init, str):
        if init != "uniform":
            raise ValueError(f"unknown initial distribution {init!r}")
        x0 = rng.uniform(-1.0, 1.0, n)
    else:
        x0 = np.array(init, dtype=float)
        if x0.size != n:
            raise ValueError("explicit initial positions must have length n")
    jitter = 0
    if coarse is not None and coarse < n:
        pre = particle_simulate(alpha, beta, coarse, coarse_steps, dt, "uniform", seed, max(tol, 1e-8))
        # keep the centre of mass of the full initial state
        x0 = _upsample(np.sort(pre.centered()), n) + x0.mean()
        jitter += pre.jitter_events
    x = x0.copy()
    disp = math.inf
    it = 0
    singular = beta < 1.0
    for it in range(1, steps + 1):
        if singular:
            order = np.argsort(x)
            gaps = np.diff(x[order])
            close = np.nonzero(gaps < 1e-12)[0]
            if close.size:
                jitter += int(close.size)
                x[order[close + 1]] += 1e-12 * (1.0 + rng.random(close.size))
        step = dt * pairwise_force(x, alpha, beta)
        x += step
        disp = float(np.max(np.abs(step)))
        if not math.isfinite(disp):
            raise FloatingPointError("particle positions diverged; reduce dt")
        if disp < tol:
            break
    return ParticleState(x, dt, it, disp < tol, disp, jitter)


def particle_support_guess(alpha: float, beta: float, n: int = 300, steps: int = 20000, dt: float = 0.05, seed: int = 0):
    """Inner and outer edge ``(a, b)`` of a symmetric support from a small simulation."""
    st = particle_simulate(alpha, beta, n, steps, dt, seed=seed, tol=1e-7)
    r = np.abs(st.centered())
    return float(r.min()), float(r.max())


def histogram_compare(state: ParticleState, measure, bins: int = 50, center: bool = True):
    """Distances between particle positions and a measure.

    Parameters
    ----------
    state : ParticleState
    measure : EquilibriumSolution, AnalyticSolution or WeightedExpansion(s)
    bins : int
    center : bool
        Shift the particles so their mean is the measure's mean (the flow
        conserves the centre of mass, which the initial draw fixes).

    Returns
    -------
    (ks, l1) : tuple of float
        Sup distance between the empirical and the measure CDF, and the L1
        distance between histogram and measure bin masses, both normalized
        to unit mass.
    """
    if state is None or state.positions.size == 0:
        raise ValueError("empty particle state")
    cdf, lo, hi, centre = _cdf_of(measure)
    x = np.sort(state.positions)
    if center:
        x = x - x.mean() + centre
    total = float(cdf(np.array([hi]))[0])
    F = cdf(x) / total
    n = x.size
    i = np.arange(1, n + 1)
    ks = float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))
    edges = np.linspace(min(lo, x[0]), max(hi, x[-1]), bins + 1)
    hist = np.histogram(x, edges)[0] / n
    mass = np.diff(cdf(edges)) / total
    return ks, float(np.sum(np.abs(hist - mass)))


def _cdf_of(measure):
    if isinstance(measure, AnalyticSolution):
        return measure.cdf, -measure.radius, measure.radius, 0.0
    if isinstance(measure, EquilibriumSolution):
        sup = measure.support
        m = measure.measure
        if isinstance(sup, SymmetricPair):
            return (lambda x: measure_cdf(m, x)), -sup.b, sup.b, 0.0
        return (lambda x: measure_cdf(m, x)), sup.a, sup.b, _mean(m, sup.a, sup.b)
    if isinstance(measure, tuple):
        lo = min(m.support[0] for m in measure)
        hi = max(m.support[1] for m in measure)
        return (lambda x: measure_cdf(measure, x)), lo, hi, _mean(measure, lo, hi)
    if isinstance(measure, WeightedExpansion):
        lo, hi = measure.support
        return (lambda x: measure_cdf(measure, x)), lo, hi, _mean(measure, lo, hi)
    raise TypeError(f"cannot compare against {type(measure).__name__}")


def _mean(m, lo, hi) -> float:
    # int x drho = b M - int_lo^hi F(x) dx
    x, w = np.polynomial.legendre.leggauss(200)
    xs = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    F = measure_cdf(m, xs)
    total = float(measure_cdf(m, np.array([hi]))[0])
    return float(hi - 0.5 * (hi - lo) * np.dot(w, F) / total)


def sample_measure(measure, size: int, seed: int = 0) -> np.ndarray:
    """Inverse-CDF draws from a measure (normalized to unit mass)."""
    cdf, lo, hi, _ = _cdf_of(measure)
    grid = np.linspace(lo, hi, 20001)
    F = cdf(grid)
    F = np.maximum.accumulate(F / F[-1])
    u = np.random.default_rng(seed).random(size)
    return np.interp(u, F, grid)


@dataclass
class RootSearchResult:
    support: Interval
    measure: WeightedExpansion
    energy: float
    residual: float
    iterations: int


def root_search_measure(spec: ProblemSpec, degree: int, init=None) -> RootSearchResult:
    """Support and measure of a potential problem by collocation and root finding.

    Unknowns are ``degree`` coefficients of the polynomial factor, the edges
    ``a, b`` and the energy ``E``. Equations: the Euler-Lagrange residual
    ``sign/alpha * int |x-y|^alpha rho + V(x) - E`` at ``degree`` Chebyshev
    points of the support, vanishing polynomial factor at both edges, and
    the mass. Only meaningful when the equilibrium density vanishes at its
    edges.

    Raises
    ------
    ValueError
        ``degree < 2`` (underdetermined) or no potential.
    ConvergenceError
        When the root finder fails.
    """
    if spec.potential is None:
        raise ValueError("root search needs an external potential")
    m = int(degree)
    if m < 2:
        raise ValueError("degree must be at least 2; a single coefficient cannot vanish at both edges")
    lam = spec.basis
    (p, coef), = spec.powers()
    Q = near_operator(p, lam, m).entries
    W = weight_integral(lam)
    k = np.arange(m)
    tc = np.cos(np.pi * (k + 0.5) / m)
    if init is None:
        init = (-1.0, 1.0)
    a0, b0 = map(float, init)
    start = solve(spec, Interval(a0, b0))
    c0 = np.zeros(m)
    take = min(m, start.coeffs.size)
    c0[:take] = start.coeffs[:take]
    x0 = np.concatenate([c0, [a0, b0, start.energy]])

    def residual(v):
        c, a, b, E = v[:m], v[m], v[m + 1], v[m + 2]
        h, mid = 0.5 * (b - a), 0.5 * (a + b)
        image = coef * h ** (p + 1.0) * (Q @ c)
        el = synthesize(image, lam, tc) + np.asarray(spec.potential(mid + h * tc), dtype=float) - E
        edges = synthesize(c, lam, np.array([-1.0, 1.0]))
        mass = h * W * c[0] - spec.mass
        return np.concatenate([el, edges, [mass]])

    res = optimize.root(residual, x0, method="hybr", options={"xtol": 1e-14, "maxfev": 200 * (m + 3)})
    norm = float(np.max(np.abs(residual(res.x))))
    if not norm < 1e-11:
        # high-degree coefficients near zero make the Jacobian nearly singular;
        # Levenberg-Marquardt tolerates that
        res = optimize.root(residual, x0, method="lm", options={"xtol": 1e-15, "ftol": 1e-15, "maxiter": 200 * (m + 3)})
        norm = float(np.max(np.abs(residual(res.x))))
    if not norm <= 1e-10 * max(1.0, abs(float(res.x[m + 2]))) or res.x[m + 1] <= res.x[m]:
        raise ConvergenceError(f"root search did not converge: {res.message} (residual {norm:.2e})")
    c, a, b, E = res.x[:m], float(res.x[m]), float(res.x[m + 1]), float(res.x[m + 2])
    return RootSearchResult(Interval(a, b), WeightedExpansion(lam, c, (a, b)), E, norm, int(res.nfev))


def coefficient_decay_report(solution: EquilibriumSolution, plateau_fraction: float = 0.1) -> dict:
    """Magnitude profile of the solution coefficients.

    Returns
    -------
    dict
        ``abs_coeffs``; ``plateau`` (median of the last ``plateau_fraction``
        of ``|c_n| / |c_0|``); ``rate`` (fitted geometric factor per index
        over the part above ``10 * plateau``, 0 when the decay is immediate);
        ``first_below`` (first index at or below ``10 * plateau``).
    """
    c = np.abs(np.asarray(solution.coeffs, dtype=float))
    rel = c / max(c[0], 1e-300)
    tail = max(2, int(round(plateau_fraction * rel.size)))
    plateau = float(np.median(rel[-tail:]))
    above = np.nonzero(rel > 10 * plateau)[0]
    first_below = int(above[-1] + 1) if above.size else 0
    head = rel[: max(first_below, 1)]
    idx = np.nonzero(head > 0)[0]
    if idx.size >= 2:
        slope = np.polyfit(idx, np.log(head[idx]), 1)[0]
        rate = float(math.exp(slope))
    else:
        rate = 0.0
    return {"abs_coeffs": c.tolist(), "plateau": plateau, "rate": rate, "first_below": first_below}


__all__ = [
    "AnalyticSolution",
    "ConvergenceError",
    "ParticleState",
    "RootSearchResult",
    "UnsupportedParametersError",
    "analytic_solution",
    "coefficient_decay_report",
    "histogram_compare",
    "measure_cdf",
    "particle_simulate",
    "particle_support_guess",
    "root_search_measure",
    "sample_measure",
]
