"""Power-law integral operators ``u -> int |x - y|**alpha u(y) dy`` in coefficient space.

The operator acts on weighted expansions ``(1 - y^2)^(lam - 1/2) sum_n c_n C_n^(lam)(y)``
and returns plain ``C^(lam)`` coefficients of the image on ``[-1, 1]``.
Columns 0 and 1 come from closed-form seeds; later columns follow from the
three-term relation

    x f_n(x) = k1(n) f_(n-1)(x) + k2(n) f_(n+1)(x),

which also holds off ``[-1, 1]`` and drives the far-field operators used for
two-interval supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import special

from . import kernels
from .records import write_csv
from .special import AccuracyError, beta_fn, chebyshev_divide_by_z, gauss_2f1, lobatto_interpolant, truncate_2f1
from .ultraspherical import OperatorMatrix, check_lambda, expand, gauss_nodes, norms, vandermonde

DROP_TOL = 1e-14


class ConsistencyError(ArithmeticError):
    """An identity that must hold analytically failed numerically."""


class GeometryError(ValueError):
    pass


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > -1.0 or not math.isfinite(alpha):
        raise ValueError(f"kernel power must exceed -1, got {alpha}")
    return alpha


def bounded_image(alpha: float, lam: float) -> bool:
    """Whether the kernel image of the weight stays bounded at the edges.

    ``int |x-y|^alpha (1-y^2)^(lam-1/2) dy`` is finite at ``x = +-1`` only
    when ``alpha + lam > -1/2``; otherwise no polynomial seed exists.
    """
    return alpha + lam > -0.5


def _is_int(v: float, tol: float = 1e-12) -> bool:
    return abs(v - round(v)) <= tol


def is_even_int(alpha: float) -> bool:
    return _is_int(alpha) and round(alpha) % 2 == 0


def select_lambda(alpha: float) -> float:
    """Basis parameter making ``lam + alpha/2`` a non-negative integer.

    Even integer powers get ``lam = alpha/2`` (``alpha = 0`` is degenerate and rejected).
    """
    alpha = _check_alpha(alpha)
    if is_even_int(alpha):
        if round(alpha) == 0:
            raise ValueError("alpha = 0 has no admissible basis parameter")
        return alpha / 2.0
    lam = math.floor(alpha / 2.0) - alpha / 2.0
    if not lam > -0.5:
        lam = math.ceil(alpha / 2.0) - alpha / 2.0
    if lam == 0.0:
        raise ValueError(f"no admissible basis parameter for alpha = {alpha}")
    return lam


def classify(alpha: float, lam: float) -> str:
    """Structural regime of the operator for ``(alpha, lam)``."""
    if -1.0 < alpha < 1.0 and alpha != 0.0 and abs(lam + alpha / 2.0) < 1e-12:
        return "diagonal"
    if is_even_int(alpha):
        return "upper-triangular-block"
    k = lam + alpha / 2.0
    if _is_int(k) and round(k) >= 0:
        return "banded"
    return "approx-banded"


@dataclass(frozen=True)
class SeedPoly:
    """Seed ``Q[w C_n](x)`` stored as ``x**parity * p(x**2)`` plus its ``C^(lam)`` coefficients."""

    lam: float
    coeffs: np.ndarray
    zpoly: object
    odd: bool
    exact: bool
    max_error: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        v = self.zpoly(x * x)
        return x * v if self.odd else v

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class SeedRows:
    n0: np.ndarray
    n1: np.ndarray
    exact: bool
    max_error: float
    info: dict = field(default_factory=dict)


def _to_coeffs(f, lam: float, degree: int) -> np.ndarray:
    # exact projection for polynomials of the given degree
    return expand(f, lam, degree + 1, quad_points=degree + 2)


def _zfactor(a, b, c, zdeg, tol):
    """Polynomial stand-in for ``2F1(a, b; c; z)``; fixed degree if ``zdeg`` is given, else adaptive."""
    term = _terminating_degree(a, b)
    if term is not None:
        return truncate_2f1(a, b, c, term)
    if zdeg is not None:
        return truncate_2f1(a, b, c, zdeg)
    best = None
    deg = 16
    while deg <= 1024:
        best = truncate_2f1(a, b, c, deg)
        if best.exact or best.max_error <= tol:
            return best
        deg *= 2
    return best


def _damped_2f1(a, b, c, z):
    """``(z - 1) 2F1(a, b; c; z)``, using its limit 0 at ``z = 1`` when ``c - a - b > -1``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inner = z < 1.0
    if np.any(~inner) and not c - a - b > -1.0:
        raise ConsistencyError("odd seed is unbounded at the interval edge")
    out[inner] = (z[inner] - 1.0) * gauss_2f1(a, b, c, z[inner])
    return out


def _terminating_degree(a, b):
    for p in (a, b):
        if p <= 1e-12 and _is_int(p):
            return int(round(-p))
    return None


def _adaptive_interp(f, zdeg, tol):
    """Chebyshev-Lobatto interpolant of ``f`` on ``[0, 1]`` with measured max error."""
    zc = 0.5 - 0.5 * np.cos(np.pi * (np.arange(513) + 0.5) / 513)
    ref = f(zc)
    deg = zdeg if zdeg is not None else 16
    while True:
        approx = lobatto_interpolant(f, deg)
        err = float(np.max(np.abs(approx(zc) - ref)))
        if zdeg is not None or err <= tol or deg >= 1024:
            return approx, err
        deg *= 2


def _k(alpha, lam):
    return lam + alpha / 2.0


def seed_n0_exact_value(alpha: float, lam: float, x):
    """Direct evaluation of ``int |x-y|^alpha w(y) dy`` for ``|x| <= 1``."""
    k = _k(alpha, lam)
    return beta_fn((alpha + 1.0) / 2.0, lam + 0.5) * gauss_2f1(-alpha / 2.0, -k, 0.5, np.asarray(x, float) ** 2)


def seed_n1_exact_value(alpha: float, lam: float, x):
    """``Q[w C_1](x)`` from the division-free form of the odd part, ``|x| <= 1``."""
    k = _k(alpha, lam)
    x = np.asarray(x, dtype=float)
    s = -2.0 * x * (k + 1.0) * beta_fn((alpha + 3.0) / 2.0, lam + 0.5) * gauss_2f1(-alpha / 2.0, -k, 1.5, x * x)
    return 2.0 * lam * (s + x * seed_n0_exact_value(alpha, lam, x))


def _measure(seed_fn, ref_fn, npts=257):
    x = np.cos(np.pi * (np.arange(npts) + 0.5) / npts)
    return float(np.max(np.abs(seed_fn(x) - ref_fn(x))))


def seed_n0(alpha: float, lam: float, tol: float = 1e-12, zdeg: int | None = None) -> SeedPoly:
    """Expansion of ``int |x-y|^alpha (1-y^2)^(lam-1/2) dy`` in ``C^(lam)``."""
    alpha = _check_alpha(alpha)
    lam = check_lambda(lam)
    k = _k(alpha, lam)
    scale = beta_fn((alpha + 1.0) / 2.0, lam + 0.5)
    F = _zfactor(-alpha / 2.0, -k, 0.5, zdeg, tol / max(abs(scale), 1.0))
    zpoly = (lambda z: scale * F(z))
    degree = 2 * F.degree
    coeffs = _to_coeffs(lambda x: zpoly(x * x), lam, degree)
    seed = SeedPoly(lam, coeffs, zpoly, False, F.exact, 0.0)
    if F.exact:
        return seed
    err = _measure(seed, lambda x: seed_n0_exact_value(alpha, lam, x))
    return SeedPoly(lam, coeffs, zpoly, False, False, err)


def seed_n1(alpha: float, lam: float, tol: float = 1e-12, zdeg: int | None = None, n0: SeedPoly | None = None) -> SeedPoly:
    """Expansion of ``int |x-y|^alpha w(y) C_1^(lam)(y) dy`` in ``C^(lam)``.

    The odd part is ``pref * [(1 + 2(alpha+lam) z) F(+1/2) + (z - 1) F(-1/2)] / x``
    with ``z = x^2``; its constant term must cancel before dividing by ``z``.
    """
    alpha = _check_alpha(alpha)
    lam = check_lambda(lam)
    k = _k(alpha, lam)
    if n0 is None:
        n0 = seed_n0(alpha, lam, tol, zdeg)
    pref = -2.0 * special.gamma((alpha + 3.0) / 2.0) * special.gamma(lam + 0.5) / (
        special.gamma(k + 1.0) * (alpha + 1.0) * (alpha + 2.0 * lam + 1.0)
    )
    a, b = -alpha / 2.0, -k
    if _terminating_degree(a, b) is not None:
        Fp = _zfactor(a, b, 0.5, None, tol)
        Fm = _zfactor(a, b, -0.5, None, tol)
        lin = np.array([1.0, 2.0 * (alpha + lam)])
        num = pref * P.polyadd(P.polymul(lin, Fp.coeffs), P.polymul([-1.0, 1.0], Fm.coeffs))
        scale = max(np.max(np.abs(num)), 1e-300)
        if abs(num[0]) > 1e-10 * scale:
            raise ConsistencyError(f"odd seed constant term {num[0]:.3e} does not cancel")
        quo = np.polynomial.Polynomial(num[1:] if num.size > 1 else [0.0])
        exact = True
    else:
        # (z - 1) F(-1/2) is interpolated as one function: the factor tames its z = 1 singularity
        num_fn = lambda z: pref * (  # noqa: E731
            (1.0 + 2.0 * (alpha + lam) * z) * gauss_2f1(a, b, 0.5, z) + _damped_2f1(a, b, -0.5, z)
        )
        num, _ = _adaptive_interp(num_fn, zdeg, tol)
        quo, rem = chebyshev_divide_by_z(num)
        scale = max(np.max(np.abs(num.coef)), 1e-300)
        if abs(rem) > 1e-10 * scale:
            raise ConsistencyError(f"odd seed constant term {rem:.3e} does not cancel")
        exact = False
    # n1(x) = 2 lam x [quo(z) + n0(z)]
    zpoly = (lambda z: 2.0 * lam * (quo(z) + n0.zpoly(z)))
    degree = 2 * max(quo.degree(), (n0.degree) // 2) + 1
    coeffs = _to_coeffs(lambda x: x * zpoly(x * x), lam, degree)
    seed = SeedPoly(lam, coeffs, zpoly, True, exact and n0.exact, 0.0)
    if seed.exact:
        return seed
    err = _measure(seed, lambda x: seed_n1_exact_value(alpha, lam, x))
    return SeedPoly(lam, coeffs, zpoly, True, False, err)


def recurrence_constants(n, alpha: float, lam: float):
    n = np.asarray(n, dtype=float)
    k1 = (n - alpha - 1.0) * (2.0 * lam + n - 1.0) / (2.0 * n * (lam + n))
    k2 = (n + 1.0) * (2.0 * lam + n + alpha + 1.0) / (2.0 * (lam + n) * (2.0 * lam + n))
    return k1, k2


def _pad(v, m):
    out = np.zeros(m)
    out[: min(m, v.size)] = v[:m]
    return out


def build_operator(
    alpha: float,
    lam: float | None = None,
    size: int = 64,
    bandwidth: int | None = None,
    tol: float = 1e-12,
    dense: bool = False,
    drop_tol: float = DROP_TOL,
) -> OperatorMatrix:
    """Matrix of ``u -> int_{-1}^{1} |x-y|^alpha u(y) dy`` on weighted ``C^(lam)`` coefficients.

    Parameters
    ----------
    alpha : float
        Kernel power, ``alpha > -1``.
    lam : float, optional
        Basis parameter; defaults to :func:`select_lambda`.
    size : int
        Number of columns.
    bandwidth : int, optional
        Approximate regime only: polynomial degree of the truncated seeds.
        By default the degree is the smallest power of two meeting ``tol``.
    dense : bool
        Approximate regime only: use the most accurate seeds available and
        keep every row (validation path).

    Returns
    -------
    OperatorMatrix
        Tall matrix; ``entries[:, n]`` holds every nonzero coefficient of column ``n``
        and ``square()`` is the leading block used in solves.
    """
    alpha = _check_alpha(alpha)
    lam = select_lambda(alpha) if lam is None else check_lambda(lam)
    if size < 2:
        raise ValueError("size must be at least 2")
    if not bounded_image(alpha, lam):
        raise ValueError(f"power {alpha} has an unbounded image in basis lam={lam}; need alpha + lam > -1/2")
    structure = classify(alpha, lam)
    zdeg = None
    if structure == "approx-banded":
        if dense:
            tol = 1e-15
        elif bandwidth is not None:
            zdeg = max(1, bandwidth // 2)
    n0 = seed_n0(alpha, lam, tol, zdeg)
    n1 = seed_n1(alpha, lam, tol, zdeg, n0=n0)
    m = max(n0.coeffs.size, n1.coeffs.size) + size + 2
    _, k2 = recurrence_constants(np.arange(1, size), alpha, lam)
    if np.any(k2 == 0.0):
        raise ConsistencyError("vanishing recurrence denominator")
    cols = kernels.column_recurrence(_pad(n0.coeffs, m), _pad(n1.coeffs, m), size, lam, alpha, 0.0, 1.0)
    if structure == "upper-triangular-block":
        cols[:, int(round(alpha)) + 1 :] = 0.0
    cols[np.abs(cols) < drop_tol] = 0.0
    last = np.nonzero(np.any(cols != 0.0, axis=1))[0]
    rows = max(size, int(last[-1]) + 1 if last.size else size)
    op = OperatorMatrix(
        cols[:rows].copy(),
        structure,
        None,
        {
            "alpha": alpha,
            "lam": lam,
            "seed_exact": n0.exact and n1.exact,
            "seed_error": max(n0.max_error, n1.max_error),
            "seed_degree": max(n0.degree, n1.degree),
        },
    )
    op.bandwidths = op.measured_bandwidths(0.0)
    return op


def popov_diagonal(alpha: float, n: int) -> float:
    """Eigenvalue of the power-law operator on ``w C_n`` when ``lam = -alpha/2``, ``|alpha| < 1``."""
    alpha = float(alpha)
    if not -1.0 < alpha < 1.0 or alpha == 0.0:
        raise ValueError("diagonal regime needs alpha in (-1, 1), alpha != 0")
    c = math.cos(math.pi * alpha / 2.0)
    if n == 0:
        return math.pi / c
    return (-1.0) ** n * math.pi / (n * beta_fn(alpha + 1.0 - n, n) * c)


# ---------------------------------------------------------------- far field


def far_n0_value(alpha: float, lam: float, x):
    """``int |x-y|^alpha w(y) dy`` for ``|x| > 1``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) <= 1.0):
        raise GeometryError("far-field evaluation needs |x| > 1")
    pref = math.sqrt(math.pi) * math.exp(special.gammaln(lam + 0.5) - special.gammaln(lam + 1.0))
    return pref * np.abs(x) ** alpha * gauss_2f1((1.0 - alpha) / 2.0, -alpha / 2.0, 1.0 + lam, 1.0 / (x * x))


def far_n1_value(alpha: float, lam: float, x):
    """``int |x-y|^alpha w(y) C_1(y) dy`` for ``|x| > 1``.

    Uses ``y = x + (y - x)`` so the odd moment reduces to two even ones.
    """
    x = np.asarray(x, dtype=float)
    up = far_n0_value(alpha + 1.0, lam, x)
    base = far_n0_value(alpha, lam, x)
    return 2.0 * lam * np.where(x < 0.0, up + x * base, x * base - up)


def far_center(a: float, b: float) -> float:
    if not 0.0 < a < b:
        raise GeometryError(f"two-interval support needs 0 < a < b, got a={a}, b={b}")
    return 2.0 * (b + a) / (a - b)


def far_field_seeds(alpha: float, lam: float, a: float, b: float, tol: float = 1e-13, max_degree: int = 512) -> SeedRows:
    """``C^(lam)(s)`` expansions of ``s -> Q[w C_n](c - s)``, ``n = 0, 1``, ``c = 2(b+a)/(a-b)``."""
    alpha = _check_alpha(alpha)
    lam = check_lambda(lam)
    c = far_center(a, b)
    f0 = lambda s: far_n0_value(alpha, lam, c - s)  # noqa: E731
    f1 = lambda s: far_n1_value(alpha, lam, c - s)  # noqa: E731
    if _is_int(alpha) and round(alpha) >= 0:
        # |x - y|^alpha keeps one sign off [-1, 1], so the seeds are polynomials of degree <= alpha + 1
        deg = int(round(alpha)) + 1
        c0 = expand(f0, lam, deg + 1, quad_points=deg + 2)
        c1 = expand(f1, lam, deg + 1, quad_points=deg + 2)
        c0[np.abs(c0) < DROP_TOL * np.max(np.abs(c0))] = 0.0
        c1[np.abs(c1) < DROP_TOL * np.max(np.abs(c1))] = 0.0
        return SeedRows(c0, c1, True, 0.0, {"degree": deg, "center": c})
    grid = np.cos(np.pi * (np.arange(129) + 0.5) / 129)
    ref0, ref1 = f0(grid), f1(grid)
    deg = 8
    while True:
        c0 = expand(f0, lam, deg + 1, quad_points=deg + 16)
        c1 = expand(f1, lam, deg + 1, quad_points=deg + 16)
        V = vandermonde(lam, deg + 1, grid)
        err = max(np.max(np.abs(V @ c0 - ref0)), np.max(np.abs(V @ c1 - ref1)))
        if err <= tol * max(1.0, np.max(np.abs(ref0))) or deg >= max_degree:
            break
        deg *= 2
    if err > tol * max(1.0, np.max(np.abs(ref0))):
        raise AccuracyError(f"far-field seeds reached only {err:.2e} at degree {deg}", achieved=float(err))
    return SeedRows(c0, c1, False, float(err), {"degree": deg, "center": c})


def _far_values(alpha, lam, X, size):
    """``f_n(X_j)`` for ``n < size`` at far points ``X`` (rows: points)."""
    if _is_int(alpha) and round(alpha) >= 0:
        # polynomial kernel: f_n = 0 beyond n = alpha; short forward run is exact
        top = int(round(alpha))
        F = np.zeros((X.size, size))
        F[:, 0] = far_n0_value(alpha, lam, X)
        if size > 1 and top >= 1:
            F[:, 1] = far_n1_value(alpha, lam, X)
        for n in range(1, min(top, size - 1)):
            k1, k2 = recurrence_constants(n, alpha, lam)
            F[:, n + 1] = (X * F[:, n] - k1 * F[:, n - 1]) / k2
        return F
    rho = float(np.min(np.abs(X) + np.sqrt(X * X - 1.0)))
    nstart = size + int(math.ceil(40.0 / math.log10(rho))) + 20
    R = kernels.miller_ratios(np.ascontiguousarray(X, dtype=float), size, nstart, lam, alpha)
    return R * far_n0_value(alpha, lam, X)[:, None]


def build_far_operator(
    alpha: float,
    lam: float,
    size: int,
    a: float,
    b: float,
    rows: int | None = None,
    method: str = "miller",
    drop_tol: float = DROP_TOL,
) -> OperatorMatrix:
    """Matrix of ``u -> int_{-1}^{1} |c - s - t|^alpha u(t) dt`` for ``c = 2(b+a)/(a-b)``.

    Column ``n`` holds ``C^(lam)(s)`` coefficients of ``s -> Q[w C_n](c - s)``.
    ``method='miller'`` evaluates every column pointwise by backward recurrence
    (the sequence is the minimal solution off ``[-1, 1]``) and projects;
    ``method='forward'`` runs the coefficient recurrence from the far seeds,
    which loses accuracy geometrically and is kept for comparison.
    """
    alpha = _check_alpha(alpha)
    lam = check_lambda(lam)
    c = far_center(a, b)
    rows = 2 * size if rows is None else rows
    if method == "forward":
        seeds = far_field_seeds(alpha, lam, a, b)
        m = max(rows, seeds.n0.size) + size + 2
        cols = kernels.column_recurrence(_pad(seeds.n0, m), _pad(seeds.n1, m), size, lam, alpha, c, -1.0)[:rows]
    elif method == "miller":
        s, wq = gauss_nodes(lam, rows + 24)
        F = _far_values(alpha, lam, c - s, size)
        V = vandermonde(lam, rows, s)
        cols = (V.T * wq) @ F / norms(lam, rows)[:, None]
    else:
        raise ValueError(f"unknown far-field method {method!r}")
    cols[np.abs(cols) < drop_tol] = 0.0
    scale = np.maximum(np.max(np.abs(cols), axis=0), 1e-300)
    tail = float(np.max(np.abs(cols[-1]) / scale))
    op = OperatorMatrix(cols, "dense", None, {"alpha": alpha, "lam": lam, "center": c, "tail_decay": tail,
                                             "method": method})
    op.bandwidths = op.measured_bandwidths(0.0)
    return op


def write_triplets(op: OperatorMatrix, path, drop_tol: float = 0.0) -> int:
    """Write ``row,col,value`` lines (with a schema header); returns the number of entries."""
    trip = op.to_triplets(drop_tol)
    return write_csv(
        path, "triplets", [("row", "int"), ("col", "int"), ("value", "float")], ((int(i), int(j), float(v)) for i, j, v in trip)
    )
