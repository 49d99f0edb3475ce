"""Equilibrium measures on a fixed support.

Single interval ``[a, b]``: with ``x = mid + h s`` and ``y = mid + h t`` the
Euler-Lagrange condition for ``K(r) = |r|^alpha/alpha - |r|^beta/beta`` reads

    (1/alpha) h^(alpha+1) Q^alpha rho~ - (1/beta) h^(beta+1) Q^beta rho~ = E,

so ``F (rho~/E) = 1`` is linear once the support is fixed; the mass condition
then recovers ``E``. Symmetric two-interval supports add far-field operators
for the mirrored half. External potentials enter through the differentiated
equation with the ``n = 0`` coefficient fixed by mass.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg

from .operators import bounded_image, build_far_operator, build_operator, is_even_int, select_lambda
from .ultraspherical import (
    WeightedExpansion,
    check_lambda,
    derivative_operator,
    expand,
    synthesize,
    weight_integral,
)

ENERGY_POINT = 0.2  # local coordinate of mid + 0.1 (b - a)
POSITIVITY_TOL = -1e-10


class DegenerateMeasureError(ArithmeticError):
    pass


class ExpansionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters of an equilibrium problem.

    Parameters
    ----------
    alpha, beta : float
        Attractive and (optional) repulsive powers, ``alpha > beta``.
    potential : callable, optional
        External potential ``V(x)``; excludes ``beta``.
    mass : float
    n : int
        Number of basis coefficients.
    tikhonov : float
        Regularization ``s``; ``0`` selects the direct solve.
    lam : float, optional
        Explicit basis parameter.
    lambda_from : {"auto", "alpha", "beta"}
        Basis policy. ``auto`` follows ``alpha`` unless ``alpha`` is an even
        integer, in which case ``beta`` decides (the ``alpha`` operator is
        finite in every basis).
    kernel_sign : float, optional
        Potential problems solve ``kernel_sign/alpha * Q^alpha rho + V = E``.
        Defaults to ``-sign(alpha)``, the repulsive-kernel orientation.
    """

    alpha: float
    beta: float | None = None
    potential: Callable | None = None
    mass: float = 1.0
    n: int = 50
    tikhonov: float = 1e-13
    lam: float | None = None
    lambda_from: str = "auto"
    kernel_sign: float | None = None
    potential_name: str | None = None

    def __post_init__(self):
        if not self.alpha > -1.0:
            raise ValueError("alpha must exceed -1")
        if self.alpha == 0.0 or self.beta == 0.0:
            raise ValueError("logarithmic kernels (power 0) are not supported")
        if self.beta is not None:
            if not self.beta > -1.0:
                raise ValueError("beta must exceed -1")
            if not self.alpha > self.beta:
                raise ValueError(f"need alpha > beta, got alpha={self.alpha}, beta={self.beta}")
            if self.potential is not None:
                raise ValueError("potential and repulsive power are mutually exclusive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.n < 2:
            raise ValueError("truncation n must be at least 2")
        if self.tikhonov < 0:
            raise ValueError("tikhonov parameter must be non-negative")
        if self.lambda_from not in ("auto", "alpha", "beta"):
            raise ValueError(f"unknown lambda policy {self.lambda_from!r}")

    @property
    def basis(self) -> float:
        if self.lam is not None:
            return check_lambda(self.lam)
        if self.beta is None:
            return select_lambda(self.alpha)
        from_alpha, from_beta = select_lambda(self.alpha), None
        if not is_even_int(self.beta):
            from_beta = select_lambda(self.beta)
        if self.lambda_from == "alpha" or from_beta is None:
            return from_alpha
        if self.lambda_from == "beta":
            return from_beta
        # auto: the beta basis for even alpha or when alpha's basis leaves beta's image unbounded
        if is_even_int(self.alpha) or not bounded_image(self.beta, from_alpha):
            return from_beta
        return from_alpha

    @property
    def sign(self) -> float:
        if self.kernel_sign is not None:
            return float(self.kernel_sign)
        return -1.0 if self.alpha > 0 else 1.0

    def powers(self):
        """``(power, coefficient)`` pairs of the kernel."""
        if self.potential is not None:
            return [(self.alpha, self.sign / self.alpha)]
        out = [(self.alpha, 1.0 / self.alpha)]
        if self.beta is not None:
            out.append((self.beta, -1.0 / self.beta))
        return out


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"support needs a < b, got ({self.a}, {self.b})")

    @property
    def half(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def mid(self) -> float:
        return 0.5 * (self.b + self.a)

    def as_list(self):
        return [[self.a, self.b]]


@dataclass(frozen=True)
class SymmetricPair:
    """Support ``[-b, -a] U [a, b]``."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"two-interval support needs a > 0, got a={self.a}")
        if not self.b > self.a:
            raise ValueError(f"two-interval support needs a < b, got ({self.a}, {self.b})")

    @property
    def half(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def right(self) -> Interval:
        return Interval(self.a, self.b)

    def as_list(self):
        return [[-self.b, -self.a], [self.a, self.b]]


@dataclass
class EquilibriumSolution:
    spec: ProblemSpec
    support: Interval | SymmetricPair
    lam: float
    coeffs: np.ndarray
    energy: float
    mass_check: float
    min_density: float
    residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return self.min_density >= POSITIVITY_TOL

    @property
    def measure(self):
        if isinstance(self.support, SymmetricPair):
            right = WeightedExpansion(self.lam, self.coeffs, (self.support.a, self.support.b))
            flip = self.coeffs * (-1.0) ** np.arange(self.coeffs.size)
            left = WeightedExpansion(self.lam, flip, (-self.support.b, -self.support.a))
            return left, right
        return WeightedExpansion(self.lam, self.coeffs, (self.support.a, self.support.b))

    def density(self, x):
        """Density at physical points ``x`` (zero off the support)."""
        m = self.measure
        if isinstance(m, tuple):
            return m[0](x) + m[1](x)
        return m(x)

    def to_dict(self) -> dict:
        return {
            "alpha": self.spec.alpha,
            "beta": self.spec.beta,
            "mass": self.spec.mass,
            "support": self.support.as_list(),
            "lambda": self.lam,
            "n": self.spec.n,
            "s": self.spec.tikhonov,
            "coeffs": [float(c) for c in self.coeffs],
            "energy": float(self.energy),
            "min_density": float(self.min_density),
            "residual": float(self.residual),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@lru_cache(maxsize=256)
def _near(alpha: float, lam: float, n: int):
    op = build_operator(alpha, lam, n)
    op.entries.setflags(write=False)
    return op


def near_operator(alpha: float, lam: float, n: int):
    """Cached ``[-1, 1]`` operator; shared and read-only."""
    return _near(float(alpha), float(lam), int(n))


def assemble_system(spec: ProblemSpec, support, size: int | None = None):
    """Tall matrix ``F`` with ``F (rho~/E) = 1`` and the right-hand side ``e_0``.

    For a :class:`SymmetricPair` the far-field term of the mirrored half is included.
    """
    if spec.potential is not None:
        raise ValueError("use solve_with_potential for problems with an external potential")
    n = spec.n if size is None else size
    lam = spec.basis
    h = support.half
    parts = []
    for p, coef in spec.powers():
        Q = near_operator(p, lam, n).entries * (coef * h ** (p + 1.0))
        if isinstance(support, SymmetricPair):
            far = build_far_operator(p, lam, n, support.a, support.b).entries * (coef * h ** (p + 1.0))
            rows = max(Q.shape[0], far.shape[0])
            Qp = np.zeros((rows, n))
            Qp[: Q.shape[0]] += Q
            Qp[: far.shape[0]] += far
            Q = Qp
        parts.append(Q)
    rows = max(P.shape[0] for P in parts)
    F = np.zeros((rows, n))
    for P in parts:
        F[: P.shape[0]] += P
    rhs = np.zeros(rows)
    rhs[0] = 1.0
    return F, rhs


def solve_direct(F, rhs, size: int | None = None):
    """Solve the leading ``size x size`` block by LU, least squares if it is singular.

    Returns ``(coeffs, info)``; ``info['ill_posed']`` flags numerical rank deficiency.
    """
    n = F.shape[1] if size is None else size
    A = np.asarray(F)[:n, :n]
    b = np.asarray(rhs)[:n]
    sv = linalg.svdvals(A)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    rank = int(np.sum(sv > sv[0] * n * np.finfo(float).eps))
    try:
        with np.errstate(all="ignore"):
            c = linalg.solve(A, b, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        c = linalg.lstsq(A, b)[0]
    return c, {"rank": rank, "cond": cond, "ill_posed": bool(rank < n)}


def solve_tikhonov(F, rhs, s: float, size: int | None = None):
    """Solve ``(s I + F^T F) c = F^T rhs`` on the leading ``size x size`` block."""
    if not s > 0:
        raise ValueError("tikhonov parameter must be positive")
    n = F.shape[1] if size is None else size
    A = np.asarray(F)[:n, :n]
    b = np.asarray(rhs)[:n]
    G = A.T @ A
    G[np.diag_indices_from(G)] += s
    # conditioning near 1/s is the regime Tikhonov is meant for; scipy's warning is noise here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        try:
            return linalg.solve(G, A.T @ b, assume_a="pos")
        except linalg.LinAlgError:
            return linalg.solve(G, A.T @ b)


def _min_density(lam: float, coeffs, points: int = 1001) -> float:
    """Minimum of the polynomial factor ``rho / weight`` on a closed uniform grid.

    The weight is positive inside, so the sign of the density is that of the
    polynomial factor. The endpoints are included: when the weight is
    singular a negative edge value means an unbounded negative density.
    """
    t = np.linspace(-1.0, 1.0, points)
    return float(np.min(synthesize(coeffs, lam, t)))


def _interior(npts: int = 20):
    return np.cos(np.pi * (np.arange(npts) + 0.5) / npts) * 0.95


def normalize_and_energy(raw, spec: ProblemSpec, support, F=None, diagnostics=None) -> EquilibriumSolution:
    """Scale ``raw = rho~/E`` to mass ``M`` and evaluate energy, residual and positivity."""
    lam = spec.basis
    raw = np.asarray(raw, dtype=float)
    halves = 2.0 if isinstance(support, SymmetricPair) else 1.0
    integral = halves * support.half * raw[0] * weight_integral(lam)
    if not abs(raw[0]) > 1e-300 or not math.isfinite(integral):
        raise DegenerateMeasureError("zeroth coefficient vanishes; mass cannot be normalized")
    E = spec.mass / integral
    coeffs = E * raw
    if F is None:
        F, _ = assemble_system(spec, support)
    image = F[:, : coeffs.size] @ coeffs
    energy = float(synthesize(image, lam, ENERGY_POINT))
    residual = float(np.max(np.abs(synthesize(image, lam, _interior()) - energy)))
    mass_check = halves * support.half * coeffs[0] * weight_integral(lam)
    diag = {"E_normalization": float(E), "tikhonov": spec.tikhonov}
    diag.update(diagnostics or {})
    return EquilibriumSolution(
        spec, support, lam, coeffs, energy, float(mass_check), _min_density(lam, coeffs), residual, diag
    )


def solve(spec: ProblemSpec, support) -> EquilibriumSolution:
    """Measure for the attractive-repulsive problem on a fixed support."""
    if spec.potential is not None:
        if not isinstance(support, Interval):
            raise ValueError("external potentials are supported on single intervals only")
        return solve_with_potential(spec, support)
    F, rhs = assemble_system(spec, support)
    n = spec.n
    diag = {}
    if spec.tikhonov > 0:
        raw = solve_tikhonov(F, rhs, spec.tikhonov, n)
    else:
        raw, diag = solve_direct(F, rhs, n)
    return normalize_and_energy(raw, spec, support, F, diag)


def solve_interval(spec: ProblemSpec, a: float, b: float) -> EquilibriumSolution:
    return solve(spec, Interval(a, b))


def solve_two_interval(spec: ProblemSpec, a: float, b: float) -> EquilibriumSolution:
    """Measure on ``[-b, -a] U [a, b]`` with mass ``M/2`` on each mirrored half."""
    return solve(spec, SymmetricPair(a, b))


def expand_potential(V, support: Interval, lam: float, n: int, tol: float = 1e-12):
    """``C^(lam)`` coefficients of ``s -> V(mid + h s)`` with a convergence check on the tail."""
    f = lambda s: np.asarray(V(support.mid + support.half * s), dtype=float)  # noqa: E731
    m = 2 * n + 8
    c = expand(f, lam, m, quad_points=m + 16)
    # judge the tail by its size as a function: for lam < 0 the basis
    # functions are small, so raw coefficient ratios overstate noise
    grid = np.linspace(-1.0, 1.0, 257)
    scale = max(float(np.max(np.abs(synthesize(c, lam, grid)))), 1e-300)
    rest = c.copy()
    rest[:n] = 0.0
    tail = float(np.max(np.abs(synthesize(rest, lam, grid)))) / scale
    if tail > tol:
        raise ExpansionError(f"potential expansion not converged at degree {n}: relative tail {tail:.2e}")
    return c


def solve_with_potential(spec: ProblemSpec, support: Interval) -> EquilibriumSolution:
    """Measure for ``kernel_sign/alpha * int |x-y|^alpha rho + V = E`` on ``[a, b]``.

    Rows: mass condition, then the first ``n - 1`` coefficients of the
    differentiated equation.
    """
    if spec.potential is None:
        raise ValueError("solve_with_potential needs an external potential")
    n, lam, h = spec.n, spec.basis, support.half
    (p, coef), = spec.powers()
    Q = near_operator(p, lam, n).entries * (coef * h ** (p + 1.0))
    m = Q.shape[0]
    D = derivative_operator(lam, m).entries
    DQ = D @ Q
    v = expand_potential(spec.potential, support, lam, max(n, m))
    Dv = derivative_operator(lam, v.size).entries @ v
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    A[0, 0] = h * weight_integral(lam)
    rhs[0] = spec.mass
    A[1:] = DQ[: n - 1]
    rhs[1:] = -Dv[: n - 1]
    if spec.tikhonov > 0:
        coeffs = solve_tikhonov(A, rhs, spec.tikhonov)
    else:
        coeffs = linalg.solve(A, rhs)
    image = Q @ coeffs
    total = np.zeros(max(image.size, v.size))
    total[: image.size] += image
    total[: v.size] += v
    energy = float(synthesize(total, lam, ENERGY_POINT))
    residual = float(np.max(np.abs(synthesize(total, lam, _interior()) - energy)))
    mass_check = h * coeffs[0] * weight_integral(lam)
    return EquilibriumSolution(
        spec,
        support,
        lam,
        coeffs,
        energy,
        float(mass_check),
        _min_density(lam, coeffs),
        residual,
        {"tikhonov": spec.tikhonov, "potential": spec.potential_name},
    )
