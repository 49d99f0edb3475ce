"""Ultraspherical (Gegenbauer) polynomial calculus on coefficient space.

Coefficient vectors are dense arrays ``c`` representing ``sum_n c[n] C_n^(lam)``.
Weighted expansions additionally carry the factor ``(1 - t**2)**(lam - 1/2)``
after an affine map of the support onto ``(-1, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, special


class InvalidBasisError(ValueError):
    """Raised for a basis parameter outside ``lam > -1/2, lam != 0``."""


class OracleError(RuntimeError):
    """Raised when the adaptive quadrature oracle does not reach its tolerance."""


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > -0.5 or lam == 0.0 or not math.isfinite(lam):
        raise InvalidBasisError(f"basis parameter must satisfy lam > -1/2 and lam != 0, got {lam}")
    return lam


@dataclass(frozen=True)
class BasisParam:
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", check_lambda(self.lam))


@dataclass(frozen=True)
class WeightedExpansion:
    """``u(x) = w(t) * sum_n coeffs[n] C_n^(lam)(t)`` with ``x = mid + half*t``."""

    lam: float
    coeffs: np.ndarray
    support: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        check_lambda(self.lam)
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        a, b = self.support
        if not b > a:
            raise ValueError(f"support must satisfy a < b, got {self.support}")
        object.__setattr__(self, "support", (float(a), float(b)))

    def to_local(self, x):
        a, b = self.support
        return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)

    def polynomial(self, x):
        """The polynomial factor evaluated at physical points ``x``."""
        return synthesize(self.coeffs, self.lam, self.to_local(x))

    def __call__(self, x):
        t = self.to_local(x)
        inside = np.abs(t) < 1.0
        out = np.zeros(np.shape(t))
        tt = np.where(inside, t, 0.0)
        vals = weight(self.lam, tt) * synthesize(self.coeffs, self.lam, tt)
        out = np.where(inside, vals, 0.0)
        return out[()] if np.ndim(out) == 0 else out


@dataclass
class OperatorMatrix:
    """A (possibly tall) coefficient-space operator with a structure tag.

    ``structure`` is one of ``diagonal``, ``tridiagonal``, ``banded``,
    ``upper-triangular-block``, ``approx-banded`` or ``dense``.
    """

    entries: np.ndarray
    structure: str = "dense"
    bandwidths: tuple[int, int] | None = None
    info: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.entries.shape

    def square(self, n: int | None = None) -> np.ndarray:
        n = self.entries.shape[1] if n is None else n
        return self.entries[:n, :n]

    def __matmul__(self, other):
        return self.entries @ other

    def measured_bandwidths(self, drop_tol: float = 1e-14) -> tuple[int, int]:
        rows, cols = np.nonzero(np.abs(self.entries) > drop_tol)
        if rows.size == 0:
            return 0, 0
        return int(np.max(rows - cols, initial=0)), int(np.max(cols - rows, initial=0))

    def to_triplets(self, drop_tol: float = 0.0):
        rows, cols = np.nonzero(np.abs(self.entries) > drop_tol)
        return [(int(i), int(j), float(self.entries[i, j])) for i, j in zip(rows, cols)]


def weight(lam: float, t):
    t = np.asarray(t, dtype=float)
    return (1.0 - t * t) ** (lam - 0.5)


def eval_poly(n: int, lam: float, x):
    """``C_n^(lam)(x)`` by the forward two-term recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    check_lambda(lam)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev[()] if prev.ndim == 0 else prev
    cur = 2.0 * lam * x
    for k in range(1, n):
        # C_{k+1} = (2(k+lam) x C_k - (k+2lam-1) C_{k-1}) / (k+1)
        prev, cur = cur, (2.0 * (k + lam) * x * cur - (k + 2.0 * lam - 1.0) * prev) / (k + 1.0)
    return cur[()] if cur.ndim == 0 else cur


def vandermonde(lam: float, n: int, x) -> np.ndarray:
    """Matrix ``V[j, k] = C_k^(lam)(x[j])`` for ``k < n``."""
    check_lambda(lam)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.empty((x.size, n))
    if n == 0:
        return V
    V[:, 0] = 1.0
    if n > 1:
        V[:, 1] = 2.0 * lam * x
    for k in range(1, n - 1):
        V[:, k + 1] = (2.0 * (k + lam) * x * V[:, k] - (k + 2.0 * lam - 1.0) * V[:, k - 1]) / (k + 1.0)
    return V


def synthesize(coeffs, lam: float, x):
    """Evaluate ``sum_n coeffs[n] C_n^(lam)(x)`` by Clenshaw summation."""
    c = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    if c.size == 0:
        return np.zeros_like(x)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(c.size - 1, 0, -1):
        # alpha_k = 2(k+lam)/(k+1), beta_{k+1} = -(k+2lam)/(k+2)
        b1, b2 = c[k] + 2.0 * (k + lam) / (k + 1.0) * x * b1 - (k + 2.0 * lam) / (k + 2.0) * b2, b1
    out = c[0] + 2.0 * lam * x * b1 - 2.0 * lam / 2.0 * b2
    return out[()] if out.ndim == 0 else out


def multiplication_operator(lam: float, size: int) -> OperatorMatrix:
    """Tridiagonal Jacobi-type matrix ``X`` with ``x f <-> X @ f``."""
    check_lambda(lam)
    if size < 2:
        raise ValueError("multiplication operator needs size >= 2")
    X = np.zeros((size, size))
    n = np.arange(size, dtype=float)
    sup = (n[1:] + 2.0 * lam - 1.0) / (2.0 * (n[1:] + lam))  # X[n-1, n]
    sub = (n[:-1] + 1.0) / (2.0 * (n[:-1] + lam))  # X[n+1, n]
    X[np.arange(size - 1), np.arange(1, size)] = sup
    X[np.arange(1, size), np.arange(size - 1)] = sub
    return OperatorMatrix(X, "tridiagonal", (1, 1))


def derivative_operator(lam: float, size: int) -> OperatorMatrix:
    """Derivative from ``C^(lam)`` coefficients to ``C^(lam+1)`` coefficients."""
    check_lambda(lam)
    if size < 1:
        raise ValueError("size must be positive")
    D = np.zeros((size, size))
    D[np.arange(size - 1), np.arange(1, size)] = 2.0 * lam
    return OperatorMatrix(D, "banded", (0, 1))


def conversion_operator(lam: float, size: int, to_lam: float | None = None) -> OperatorMatrix:
    """Conversion ``C^(lam) -> C^(lam+1)`` from ``C_n^lam = lam/(n+lam) (C_n^(lam+1) - C_(n-2)^(lam+1))``."""
    check_lambda(lam)
    if to_lam is not None and abs(to_lam - lam - 1.0) > 1e-14:
        raise NotImplementedError("only unit parameter steps are supported; compose them")
    S = np.zeros((size, size))
    n = np.arange(size, dtype=float)
    S[np.arange(size), np.arange(size)] = lam / (n + lam)
    S[np.arange(size - 2), np.arange(2, size)] = -lam / (n[2:] + lam)
    return OperatorMatrix(S, "banded", (0, 2))


def weight_lowering_operator(lam: float, size: int) -> OperatorMatrix:
    """Map ``C^(lam+1)`` coefficients of ``q`` to ``C^(lam)`` coefficients of ``(1-x^2) q``.

    Tall operator of shape ``(size + 2, size)``.
    """
    check_lambda(lam)
    L = np.zeros((size + 2, size))
    n = np.arange(size, dtype=float)
    den = 4.0 * lam * (n + lam + 1.0)
    L[np.arange(size), np.arange(size)] = (n + 2.0 * lam) * (n + 2.0 * lam + 1.0) / den
    L[np.arange(2, size + 2), np.arange(size)] = -(n + 1.0) * (n + 2.0) / den
    return OperatorMatrix(L, "banded", (2, 0))


def weight_integral(lam: float) -> float:
    """``int_{-1}^{1} (1-x^2)^(lam-1/2) dx``."""
    lam = check_lambda(lam)
    return 2.0 ** (1.0 - 2.0 * lam) * math.pi * special.gamma(2.0 * lam) / (lam * special.gamma(lam) ** 2)


def norms(lam: float, n: int) -> np.ndarray:
    """Squared norms ``h_k = int w C_k^2`` for ``k < n``."""
    lam = check_lambda(lam)
    k = np.arange(n, dtype=float)
    logmag = (
        (1.0 - 2.0 * lam) * math.log(2.0)
        + math.log(math.pi)
        + special.gammaln(k + 2.0 * lam)
        - special.gammaln(k + 1.0)
        - np.log(np.abs(k + lam))
        - 2.0 * special.gammaln(lam)
    )
    sign = special.gammasgn(k + 2.0 * lam) * np.sign(k + lam)
    return sign * np.exp(logmag)


def definite_integral(u: WeightedExpansion) -> float:
    a, b = u.support
    c0 = u.coeffs[0] if u.coeffs.size else 0.0
    return 0.5 * (b - a) * c0 * weight_integral(u.lam)


def _orthonormal(lam: float, q: int, x):
    """Orthonormal ``p_q(x)``, ``p_q'(x)`` and ``sum_{k<q} p_k(x)^2``."""
    k = np.arange(1, q + 1, dtype=float)
    b = np.sqrt(k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0)))
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(weight_integral(lam)))
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    ssq = np.zeros_like(x)
    for j in range(q):
        ssq += p * p
        bj = b[j - 1] if j > 0 else 0.0
        p_next = (x * p - bj * p_prev) / b[j]
        d_next = (p + x * d - bj * d_prev) / b[j]
        p_prev, p, d_prev, d = p, p_next, d, d_next
    return p, d, ssq


def gauss_nodes(lam: float, q: int):
    """Gauss nodes and weights for the weight ``(1-x^2)^(lam-1/2)``.

    Golub-Welsch eigenvalues polished by Newton steps, with Christoffel
    weights; holds full accuracy where ``scipy.special.roots_jacobi`` drifts
    for negative exponents and many nodes.
    """
    check_lambda(lam)
    if q == 1:
        return np.zeros(1), np.array([weight_integral(lam)])
    k = np.arange(1, q, dtype=float)
    off = np.sqrt(k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0)))
    x = linalg.eigh_tridiagonal(np.zeros(q), off, eigvals_only=True)
    for _ in range(3):
        p, d, _ = _orthonormal(lam, q, x)
        x = x - p / d
    x = np.sort(0.5 * (x - x[::-1]))
    _, _, ssq = _orthonormal(lam, q, x)
    w = 1.0 / ssq
    w = 0.5 * (w + w[::-1])
    return x, w * (weight_integral(lam) / w.sum())


def expand(f, lam: float, n: int, quad_points: int | None = None) -> np.ndarray:
    """First ``n`` ``C^(lam)`` coefficients of ``f`` by Gauss quadrature projection.

    Exact for polynomials of degree below ``2*quad_points - n + 1``.
    """
    q = max(n + 1, 2 * n) if quad_points is None else quad_points
    x, wq = gauss_nodes(lam, q)
    V = vandermonde(lam, n, x)
    vals = np.asarray(f(x), dtype=float)
    return (V.T @ (wq * vals)) / norms(lam, n)


def quadrature_oracle(alpha: float, lam: float, n: int, x: float, f=None, tol: float = 1e-10) -> float:
    """``int_{-1}^{1} |x-y|^alpha (1-y^2)^(lam-1/2) C_n^(lam)(y) f(y) dy`` by adaptive quadrature.

    Algebraic endpoint factors are integrated exactly by QUADPACK's QAWS
    rule; the interior singular point ``y = x`` is a panel breakpoint.
    """
    check_lambda(lam)
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    x = float(x)
    g = (lambda y: eval_poly(n, lam, y)) if f is None else (lambda y: eval_poly(n, lam, y) * f(y))
    e = lam - 0.5
    pieces = []
    if -1.0 < x < 1.0:
        pieces.append((lambda y: (1.0 - y) ** e * g(y), -1.0, x, (e, alpha)))
        pieces.append((lambda y: (1.0 + y) ** e * g(y), x, 1.0, (alpha, e)))
    elif x >= 1.0:
        if x == 1.0:
            pieces.append((g, -1.0, 1.0, (e, e + alpha)))
        else:
            pieces.append((lambda y: (x - y) ** alpha * g(y), -1.0, 1.0, (e, e)))
    else:
        if x == -1.0:
            pieces.append((g, -1.0, 1.0, (e + alpha, e)))
        else:
            pieces.append((lambda y: (y - x) ** alpha * g(y), -1.0, 1.0, (e, e)))
    total = 0.0
    err = 0.0
    for fun, lo, hi, wvar in pieces:
        val, est, info = integrate.quad(
            fun, lo, hi, weight="alg", wvar=wvar, epsabs=tol / 4, epsrel=1e-13, limit=400, full_output=1
        )[:3]
        total += val
        err += est
    if err > tol:
        raise OracleError(f"quadrature oracle error estimate {err:.2e} exceeds tolerance {tol:.1e}")
    return total
