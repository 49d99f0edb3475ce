"""Pure NumPy implementations of the hot loops.

Mirrors the compiled ``_ckernels`` module one-for-one; used when the
extension is not built or ``EQMEASURE_PURE_PYTHON`` is set.
"""

import numpy as np


def hyp2f1_series(a, b, c, z, max_terms, tol):
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    n = 0
    last = np.abs(term)
    while n < max_terms:
        term = term * (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total = total + term
        n += 1
        last = np.abs(term)
        if np.all(last <= tol * np.maximum(np.abs(total), 1e-300)):
            break
    return total, n, last


def _mult(v, lam, shift, sign):
    # (shift*I + sign*X) v with X the C^(lam) Jacobi-type matrix
    m = v.shape[0]
    i = np.arange(m, dtype=float)
    out = shift * v.copy()
    xv = np.zeros_like(v)
    xv[:-1] += (i[:-1] + 2.0 * lam) / (2.0 * (i[:-1] + 1.0 + lam)) * v[1:]
    xv[1:] += i[1:] / (2.0 * (i[1:] - 1.0 + lam)) * v[:-1]
    return out + sign * xv


def column_recurrence(col0, col1, ncols, lam, alpha, shift, sign):
    """Columns ``0..ncols-1`` from ``(shift + sign*x) col_n = k1 col_{n-1} + k2 col_{n+1}``."""
    m = col0.shape[0]
    out = np.zeros((m, ncols))
    out[:, 0] = col0
    if ncols > 1:
        out[:, 1] = col1
    for n in range(1, ncols - 1):
        k1 = (n - alpha - 1.0) * (2.0 * lam + n - 1.0) / (2.0 * n * (lam + n))
        k2 = (n + 1.0) * (2.0 * lam + n + alpha + 1.0) / (2.0 * (lam + n) * (2.0 * lam + n))
        out[:, n + 1] = (_mult(out[:, n], lam, shift, sign) - k1 * out[:, n - 1]) / k2
    return out


def miller_ratios(x, nmax, nstart, lam, alpha):
    """Minimal solution ``g_n(x) / g_0(x)`` of ``x g_n = k1 g_{n-1} + k2 g_{n+1}``, ``n < nmax``.

    Backward recurrence from ``g_{nstart+1} = 0, g_nstart = tiny``.
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros((nstart + 2, x.size))
    g[nstart] = 1e-300
    for n in range(nstart, 0, -1):
        k1 = (n - alpha - 1.0) * (2.0 * lam + n - 1.0) / (2.0 * n * (lam + n))
        k2 = (n + 1.0) * (2.0 * lam + n + alpha + 1.0) / (2.0 * (lam + n) * (2.0 * lam + n))
        g[n - 1] = (x * g[n] - k2 * g[n + 1]) / k1
        big = np.abs(g[n - 1]) > 1e250
        if np.any(big):
            g[:, big] *= 1e-250
    return (g[:nmax] / g[0]).T.copy()


def pairwise_force(x, alpha, beta):
    """``-(1/N) sum_j K'(x_i - x_j)`` with ``K'(r) = sign(r)(|r|^(alpha-1) - |r|^(beta-1))``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.empty(n)
    block = 512
    for s in range(0, n, block):
        d = x[s : s + block, None] - x[None, :]
        r = np.abs(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.sign(d) * (r ** (alpha - 1.0) - r ** (beta - 1.0))
        f[r == 0.0] = 0.0
        out[s : s + block] = -f.sum(axis=1) / n
    return out
