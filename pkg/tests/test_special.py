import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from eqmeasure import special as sp

params = st.floats(-3.0, 3.0)
cparams = st.floats(-2.5, 3.5).filter(lambda c: not sp._is_nonpos_int(c, 1e-3))


def test_2f1_reference_values():
    assert sp.gauss_2f1(0.3, -1.7, 2.2, 0.0) == 1.0
    assert sp.gauss_2f1(-1.0, 2.0, 3.0, 0.5) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert sp.gauss_2f1(0.5, 0.5, 1.5, 0.25) == pytest.approx(math.asin(0.5) / 0.5, rel=1e-14)


def test_2f1_polynomial_in_x_squared():
    # a = -alpha/2 = -1, b = -k: degree <= min(1, k) in z
    for k in range(4):
        poly = sp.truncate_2f1(-1.0, -float(k), 0.5, 6)
        assert poly.exact
        assert np.count_nonzero(poly.coeffs) == min(1, k) + 1


def test_2f1_against_mpmath_near_one():
    for a, b, c in [(0.3, -0.7, 0.5), (-0.75, -1.1905, 0.5), (0.2, 0.4, 1.3), (0.25, 0.5, 0.75)]:
        for z in (0.6, 0.9, 0.99, 1.0)[: 4 if c - a - b > 0 else 3]:
            ref = float(mpmath.hyp2f1(a, b, c, z))
            assert sp.gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-11)


def test_2f1_errors():
    with pytest.raises(sp.DomainError):
        sp.gauss_2f1(0.5, 0.5, -2.0, 0.3)
    with pytest.raises(sp.DomainError):
        sp.gauss_2f1(0.5, 0.5, 1.0, 1.0)
    with pytest.raises(sp.DomainError):
        sp.gauss_2f1(0.5, 0.5, 1.5, 1.2)


def test_beta_reference_values():
    assert sp.beta_fn(1, 1) == pytest.approx(1.0, rel=1e-15)
    assert sp.beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    assert sp.beta_fn(0.5, 0.75) == pytest.approx(float(mpmath.beta(0.5, 0.75)), rel=1e-14)
    assert sp.beta_fn(-0.5, 1.0) == pytest.approx(-2.0, rel=1e-14)
    with pytest.raises(sp.DomainError):
        sp.beta_fn(-1.0, 0.5)


def test_truncate_reference_cases():
    exact = sp.truncate_2f1(-2.0, 0.7, 1.3, 5)
    assert exact.exact and np.all(exact.coeffs[3:] == 0.0)
    const = sp.truncate_2f1(0.4, 0.9, 1.1, 0)
    assert const.degree == 0 and const(0.37) == 1.0 and const.max_error == math.inf
    assert sp.truncate_2f1(0.4, 0.2, 1.1, 0).max_error > 0
    with pytest.raises(sp.DomainError):
        sp.truncate_2f1(0.4, 0.9, 1.1, -1)


def test_truncation_error_monotone():
    z = np.linspace(0, 0.9, 200)
    ref = sp.gauss_2f1(-0.75, -1.1905, 0.5, z)
    errs = [np.max(np.abs(sp.truncate_2f1(-0.75, -1.1905, 0.5, d)(z) - ref)) for d in range(1, 40)]
    assert all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(errs, errs[1:]))


def test_chebyshev_divide_by_z():
    p = np.polynomial.Chebyshev.fit(np.linspace(0, 1, 9), np.linspace(0, 1, 9) ** 3 + 2 * np.linspace(0, 1, 9), 5, domain=[0, 1])
    quo, rem = sp.chebyshev_divide_by_z(p)
    z = np.linspace(0.1, 1, 7)
    assert abs(rem) < 1e-12
    assert np.allclose(quo(z), z**2 + 2, atol=1e-12)


@given(a=params, b=params, c=cparams, z=st.floats(0.0, 0.9))
def test_2f1_symmetric_in_numerator_parameters(a, b, c, z):
    v1, v2 = sp.gauss_2f1(a, b, c, z), sp.gauss_2f1(b, a, c, z)
    assert v1 == pytest.approx(v2, rel=1e-13, abs=1e-13)


@given(a=params, n=st.integers(0, 10), c=cparams, z=st.floats(-0.5, 1.0))
def test_polynomial_case_matches_term_sum(a, n, c, z):
    terms = sum((-1) ** j * math.comb(n, j) * sp.pochhammer(a, j) / sp.pochhammer(c, j) * z**j for j in range(n + 1))
    assert sp.gauss_2f1(a, -n, c, z) == pytest.approx(terms, rel=1e-13, abs=1e-13)


@given(a=params, b=params, c=cparams, z=st.floats(0.0, 0.9))
def test_2f1_matches_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assume(abs(ref) > 1e-6)
    assert sp.gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-10)


@given(x=st.floats(-5, 5), n=st.integers(0, 12))
def test_pochhammer_recursion(x, n):
    assert sp.pochhammer(x, 0) == 1.0
    assert sp.pochhammer(x, n + 1) == pytest.approx(sp.pochhammer(x, n) * (x + n), rel=1e-14, abs=1e-300)
