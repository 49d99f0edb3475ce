"""Gamma-family helpers and the Gauss hypergeometric function on the real line."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy import fft, special

from . import kernels


class DomainError(ValueError):
    pass


class AccuracyError(ArithmeticError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


def _is_nonpos_int(v: float, tol: float = 1e-12) -> bool:
    return v <= tol and abs(v - round(v)) <= tol


def pochhammer(x: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


def beta_fn(x: float, y: float) -> float:
    """Beta function via log-Gamma with explicit sign tracking."""
    if _is_nonpos_int(x) or _is_nonpos_int(y):
        raise DomainError(f"Beta function pole at ({x}, {y})")
    if _is_nonpos_int(x + y):
        return 0.0
    lg = special.gammaln(x) + special.gammaln(y) - special.gammaln(x + y)
    sign = special.gammasgn(x) * special.gammasgn(y) * special.gammasgn(x + y)
    return float(sign * math.exp(lg))


def _series(a, b, c, z, max_terms=20000, tol=1e-17):
    z = np.asarray(z, dtype=float)
    total, terms, last = kernels.hyp2f1_series(float(a), float(b), float(c), np.ravel(z), max_terms, tol)
    if np.any(~np.isfinite(total)):
        raise AccuracyError("hypergeometric series overflow")
    if terms >= max_terms:
        raise AccuracyError("hypergeometric series did not converge", achieved=float(np.max(last)))
    return total.reshape(z.shape)


def hyp2f1_poly_coeffs(a: float, n: int, c: float) -> np.ndarray:
    """Monomial coefficients of the terminating series ``2F1(a, -n; c; z)``."""
    if n < 0 or int(n) != n:
        raise DomainError("second parameter must be a non-positive integer")
    if _is_nonpos_int(c) and -c < n:
        raise DomainError("third parameter is a pole of the terminating series")
    out = np.empty(n + 1)
    for j in range(n + 1):
        out[j] = (-1) ** j * math.comb(n, j) * pochhammer(a, j) / pochhammer(c, j)
    return out


def _terminating(a, b):
    for p, q in ((a, b), (b, a)):
        if _is_nonpos_int(p):
            return int(round(-p)), q
    return None


def gauss_2f1(a: float, b: float, c: float, z):
    """Real ``2F1(a, b; c; z)`` for ``-1/2 <= z <= 1``.

    Direct series for ``|z| <= 1/2``; the ``1 - z`` connection formula on
    ``(1/2, 1)``; Gauss's sum at ``z = 1``. Terminating cases are summed
    exactly anywhere. When ``c - a - b`` is an integer the connection
    formula is singular and evaluation falls back to mpmath.
    """
    if _is_nonpos_int(c):
        raise DomainError(f"c = {c} is a non-positive integer")
    zarr = np.asarray(z, dtype=float)
    term = _terminating(a, b)
    if term is not None:
        n, other = term
        out = P.polyval(zarr, hyp2f1_poly_coeffs(other, n, c))
        return out[()] if np.ndim(out) == 0 else out
    if np.any(zarr > 1.0) or np.any(zarr < -0.5):
        raise DomainError("z outside [-1/2, 1]")
    flat = np.ravel(zarr)
    out = np.empty_like(flat)
    near = flat > 0.5
    if np.any(~near):
        out[~near] = _series(a, b, c, flat[~near])
    if np.any(near):
        out[near] = _near_one(a, b, c, flat[near])
    out = out.reshape(zarr.shape)
    return out[()] if out.ndim == 0 else out


def _near_one(a, b, c, z):
    s = c - a - b
    at_one = z == 1.0
    out = np.empty_like(z)
    if np.any(at_one):
        if s <= 0:
            raise DomainError("2F1 diverges at z = 1 when c - a - b <= 0")
        out[at_one] = special.gamma(c) * special.gamma(s) * special.rgamma(c - a) * special.rgamma(c - b)
    rest = ~at_one
    if not np.any(rest):
        return out
    zr = z[rest]
    if abs(s - round(s)) < 1e-9:
        out[rest] = [float(mpmath.hyp2f1(a, b, c, float(v))) for v in zr]
        return out
    w = 1.0 - zr
    A = special.gamma(c) * special.gamma(s) * special.rgamma(c - a) * special.rgamma(c - b)
    B = special.gamma(c) * special.gamma(-s) * special.rgamma(a) * special.rgamma(b)
    f1 = gauss_2f1(a, b, 1.0 - s, w) if A != 0.0 else 0.0
    f2 = gauss_2f1(c - a, c - b, 1.0 + s, w) if B != 0.0 else 0.0
    out[rest] = A * f1 + B * w**s * f2
    return out


@dataclass(frozen=True)
class HypergeomPoly:
    """Polynomial in ``z`` standing in for ``2F1(a, b; c; z)`` on ``[0, 1]``.

    ``series`` is a numpy polynomial object (power basis when exact,
    Chebyshev on domain ``[0, 1]`` otherwise).
    """

    params: tuple[float, float, float]
    series: object
    exact: bool
    max_error: float

    def __call__(self, z):
        return self.series(z)

    @property
    def degree(self) -> int:
        return self.series.degree()

    @property
    def coeffs(self) -> np.ndarray:
        if self.exact:
            return self.series.coef
        return self.series.convert(kind=np.polynomial.Polynomial, domain=[-1, 1], window=[-1, 1]).coef


def lobatto_interpolant(f, degree: int, domain=(0.0, 1.0)) -> np.polynomial.Chebyshev:
    """Chebyshev interpolant through the ``degree + 1`` extrema points (endpoints included)."""
    lo, hi = domain
    if degree == 0:
        return np.polynomial.Chebyshev([float(f(np.array([lo]))[0])], domain=list(domain))
    u = np.cos(np.pi * np.arange(degree + 1) / degree)
    vals = np.asarray(f(0.5 * (hi + lo) + 0.5 * (hi - lo) * u), dtype=float)
    coef = fft.dct(vals, type=1) / degree
    coef[0] /= 2.0
    coef[-1] /= 2.0
    return np.polynomial.Chebyshev(coef, domain=list(domain))


def truncate_2f1(a: float, b: float, c: float, degree: int, check_points: int = 513) -> HypergeomPoly:
    """Degree-``degree`` polynomial stand-in for ``2F1(a, b; c; z)`` on ``z in [0, 1]``."""
    if degree < 0:
        raise DomainError("degree must be non-negative")
    if _is_nonpos_int(c):
        raise DomainError(f"c = {c} is a non-positive integer")
    term = _terminating(a, b)
    if degree == 0:
        exact = term is not None and term[0] == 0
        if exact:
            err = 0.0
        elif c - a - b <= 0:
            err = math.inf  # unbounded as z -> 1
        else:
            err = float(np.max(np.abs(gauss_2f1(a, b, c, np.linspace(0, 1, 9)) - 1.0)))
        return HypergeomPoly((a, b, c), np.polynomial.Polynomial([1.0]), exact, err)
    if term is not None and term[0] <= degree:
        n, other = term
        coef = np.zeros(degree + 1)
        coef[: n + 1] = hyp2f1_poly_coeffs(other, n, c)
        return HypergeomPoly((a, b, c), np.polynomial.Polynomial(coef), True, 0.0)
    approx = lobatto_interpolant(lambda z: gauss_2f1(a, b, c, z), degree)
    zc = 0.5 - 0.5 * np.cos(np.pi * (np.arange(check_points) + 0.5) / check_points)
    err = float(np.max(np.abs(approx(zc) - gauss_2f1(a, b, c, zc))))
    return HypergeomPoly((a, b, c), approx, False, err)


def chebyshev_divide_by_z(series: np.polynomial.Chebyshev) -> tuple[np.polynomial.Chebyshev, float]:
    """Quotient and remainder of ``p(z) / z`` for a Chebyshev series on ``[0, 1]``.

    With ``u = 2z - 1`` we have ``z = (1 + u)/2``.
    """
    quo, rem = C.chebdiv(series.coef, [1.0, 1.0])
    return np.polynomial.Chebyshev(2.0 * quo, domain=[0, 1]), float(rem[0])
