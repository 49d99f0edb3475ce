import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqmeasure import ultraspherical as us

lams = st.floats(-0.45, 3.0).filter(lambda v: abs(v) > 0.05)


# frozen reference values


def test_eval_poly_reference_values():
    assert us.eval_poly(0, 0.7, 0.3) == 1.0
    assert us.eval_poly(1, 1.0, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert us.eval_poly(2, 0.5, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_multiplication_operator_reference_entries():
    X = us.multiplication_operator(1.0, 3).entries
    assert X[0, 1] == pytest.approx(0.5, abs=1e-15)
    for lam in (-0.3, 0.5, 1.0, 2.7):
        col = us.multiplication_operator(lam, 4).entries[:, 0]
        assert col[1] == pytest.approx(1.0 / (2.0 * lam), abs=1e-15)
        assert np.count_nonzero(col) == 1


def test_multiplication_of_constant_is_x():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 10)
    for lam in (0.25, 1.5):
        X = us.multiplication_operator(lam, 4).entries
        assert np.allclose(us.synthesize(X[:, 0], lam, x), x, atol=1e-15)


def test_multiplication_operator_size_check():
    with pytest.raises(ValueError):
        us.multiplication_operator(0.5, 1)


def test_derivative_operator_reference():
    for lam in (0.5, -0.25, 2.0):
        D = us.derivative_operator(lam, 4).entries
        assert np.allclose(D @ np.eye(4)[1], 2 * lam * np.eye(4)[0])
        assert np.all(D @ np.eye(4)[0] == 0.0)


def test_derivative_fd_degree5_half():
    rng = np.random.default_rng(1)
    f = rng.standard_normal(6)
    x = np.linspace(-0.95, 0.95, 21)
    h = 1e-5
    fd = (us.synthesize(f, 0.5, x + h) - us.synthesize(f, 0.5, x - h)) / (2 * h)
    exact = us.synthesize(us.derivative_operator(0.5, 6).entries @ f, 1.5, x)
    assert np.max(np.abs(fd - exact)) <= 1e-6


def test_conversion_reference():
    S = us.conversion_operator(0.5, 5).entries
    assert np.allclose(S @ np.eye(5)[0], np.eye(5)[0])
    rng = np.random.default_rng(2)
    f = rng.standard_normal(9)
    x = rng.uniform(-1, 1, 20)
    g = us.conversion_operator(0.5, 9).entries @ f
    assert np.max(np.abs(us.synthesize(f, 0.5, x) - us.synthesize(g, 1.5, x))) <= 1e-12


def test_conversion_rejects_non_unit_step():
    with pytest.raises(NotImplementedError):
        us.conversion_operator(0.5, 4, to_lam=2.5)


def test_weight_lowering_identity():
    # (1 - x^2) C_2^(lam+1) is a combination of C_2^(lam) and C_4^(lam) (plus C_0)
    lam = 0.5
    L = us.weight_lowering_operator(lam, 4).entries
    x = np.linspace(-1, 1, 17)
    lhs = (1 - x * x) * us.eval_poly(2, lam + 1, x)
    rhs = us.synthesize(L @ np.eye(4)[2], lam, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13
    assert np.count_nonzero(np.abs(L @ np.eye(4)[2]) > 1e-15) == 2


def test_definite_integral_reference():
    assert us.definite_integral(us.WeightedExpansion(0.5, [1.0])) == pytest.approx(2.0, rel=1e-15)
    for lam in (-0.25, 0.5, 1.7):
        assert us.definite_integral(us.WeightedExpansion(lam, [0, 0, 0, 1.0])) == 0.0
    a = us.definite_integral(us.WeightedExpansion(0.5, [1.0], (-1, 1)))
    b = us.definite_integral(us.WeightedExpansion(0.5, [1.0], (0, 2)))
    assert a == b


def test_invalid_basis():
    for lam in (0.0, -0.5, -0.7, math.nan):
        with pytest.raises(us.InvalidBasisError):
            us.BasisParam(lam)
    with pytest.raises(us.InvalidBasisError):
        us.definite_integral(us.WeightedExpansion(-0.6, [1.0]))


def test_quadrature_oracle_reference():
    assert us.quadrature_oracle(1.0, 0.5, 0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert us.quadrature_oracle(0.5, -0.25, 1, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert us.quadrature_oracle(2.0, 0.5, 0, 0.0) == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_quadrature_oracle_reports_failure():
    with pytest.raises(us.OracleError):
        us.quadrature_oracle(-0.9, -0.45, 0, 0.3, f=lambda y: np.sin(400 * y), tol=1e-15)


def test_gauss_nodes_integrate_polynomials():
    for lam in (-0.4, 0.25, 2.5):
        x, w = us.gauss_nodes(lam, 30)
        for k in range(0, 59, 7):
            exact = 0.0 if k % 2 else us.weight_integral(lam) * math.prod((j + 0.5) / (j + lam + 1.0) for j in range(k // 2))
            assert np.dot(w, x**k) == pytest.approx(exact, abs=1e-13)


# properties


@given(lam=lams, x=st.floats(-1, 1))
def test_low_degree_closed_forms(lam, x):
    expected = [1.0, 2 * lam * x, 2 * lam * (lam + 1) * x * x - lam, 4 / 3 * lam * (lam + 1) * (lam + 2) * x**3 - 2 * lam * (lam + 1) * x]
    for n, e in enumerate(expected):
        assert us.eval_poly(n, lam, x) == pytest.approx(e, abs=1e-12 * max(1.0, abs(lam) ** 3))


@given(lam=lams, seed=st.integers(0, 2**31))
def test_definite_integral_is_linear_and_ignores_higher_terms(lam, seed):
    rng = np.random.default_rng(seed)
    c, d = rng.standard_normal(8), rng.standard_normal(8)
    I = lambda v: us.definite_integral(us.WeightedExpansion(lam, v, (-0.3, 2.0)))  # noqa: E731
    assert I(2 * c + d) == pytest.approx(2 * I(c) + I(d), rel=1e-12, abs=1e-12)
    e = c.copy()
    e[1:] = rng.standard_normal(7)
    assert I(e) == I(c)


@given(lam=lams, seed=st.integers(0, 2**31))
def test_expand_recovers_polynomials(lam, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(12)
    got = us.expand(lambda x: us.synthesize(c, lam, x), lam, 12)
    assert np.allclose(got, c, atol=1e-10 * np.max(np.abs(c)) * max(1.0, lam) ** 4)
