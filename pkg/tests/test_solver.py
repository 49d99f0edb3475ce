import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqmeasure import solver
from eqmeasure import ultraspherical as us
from eqmeasure.optimize import closed_form_radius
from eqmeasure.solver import Interval, ProblemSpec, SymmetricPair, solve_interval
from eqmeasure.validation import analytic_solution


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(1.5, 2.0)
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 1.5, mass=0.0)
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 1.5, n=1)
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 1.5, potential=lambda x: x)
    with pytest.raises(ValueError):
        ProblemSpec(-1.2, -1.5)
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 0.0)


def test_basis_policy():
    assert ProblemSpec(2.5, 1.5).basis == pytest.approx(-0.25)
    assert ProblemSpec(2.0, 1.5).basis == pytest.approx(0.25)
    assert ProblemSpec(2.0, 1.5, lambda_from="alpha").basis == 1.0
    assert ProblemSpec(2.5, 1.5, lambda_from="beta").basis == pytest.approx(0.25)
    # alpha's basis would leave the beta image unbounded at the edges
    assert ProblemSpec(2.5, -0.5).basis == pytest.approx(0.25)
    assert ProblemSpec(2.5, 1.5, lam=0.7).basis == 0.7


def test_supports():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        SymmetricPair(0.0, 1.0)
    assert SymmetricPair(0.2, 0.5).as_list() == [[-0.5, -0.2], [0.2, 0.5]]


def test_exact_radius_reproduces_closed_form_density():
    exact = analytic_solution(2.0, 1.5, 2.0)
    sol = solve_interval(ProblemSpec(2.0, 1.5, mass=2.0, n=40), -exact.radius, exact.radius)
    x = exact.radius * np.linspace(-0.99, 0.99, 501)
    assert np.max(np.abs(sol.density(x) - exact.density(x))) <= 1e-9
    assert sol.admissible
    assert sol.residual <= 1e-10 * abs(sol.energy)


def test_density_zero_off_support():
    sol = solve_interval(ProblemSpec(2.0, 1.5, n=20), -0.5, 0.5)
    assert np.all(sol.density(np.array([-0.8, -0.5, 0.5, 0.9])) == 0.0)


def test_mass_scaling_is_linear():
    spec = ProblemSpec(7 / 3, 2.0, n=30)
    a = solve_interval(spec, -1.0, 1.0)
    b = solve_interval(ProblemSpec(7 / 3, 2.0, mass=2.0, n=30), -1.0, 1.0)
    assert np.allclose(b.coeffs, 2 * a.coeffs, rtol=1e-12)
    assert b.energy == pytest.approx(2 * a.energy, rel=1e-12)


def test_direct_and_tikhonov_agree_at_low_order():
    R = closed_form_radius(ProblemSpec(7 / 3, 2.0))
    direct = solve_interval(ProblemSpec(7 / 3, 2.0, n=12, tikhonov=0.0), -R, R)
    tik = solve_interval(ProblemSpec(7 / 3, 2.0, n=12, tikhonov=1e-13), -R, R)
    assert np.allclose(direct.coeffs, tik.coeffs, atol=1e-10)
    assert "ill_posed" in direct.diagnostics


def test_tikhonov_large_s_asymptote():
    F, rhs = solver.assemble_system(ProblemSpec(7 / 3, 2.0, n=10), Interval(-1.0, 1.0))
    A = F[:10, :10]
    s = 1e8
    c = solver.solve_tikhonov(F, rhs, s, 10)
    assert np.allclose(s * c, A.T @ rhs[:10], rtol=1e-6)


def test_tikhonov_rejects_nonpositive():
    F, rhs = np.eye(3), np.ones(3)
    with pytest.raises(ValueError):
        solver.solve_tikhonov(F, rhs, 0.0)


def test_tikhonov_formulations_agree():
    rng = np.random.default_rng(3)
    F = rng.standard_normal((12, 8))
    rhs = rng.standard_normal(12)
    s = 1e-3
    A, b = F[:8], rhs[:8]
    aug = np.vstack([A, math.sqrt(s) * np.eye(8)])
    ref = np.linalg.lstsq(aug, np.concatenate([b, np.zeros(8)]), rcond=None)[0]
    assert np.allclose(solver.solve_tikhonov(F, rhs, s, 8), ref, atol=1e-12)


def test_expand_potential_converges():
    lam = -0.25
    coeffs = solver.expand_potential(lambda x: x * x, Interval(-1.0, 1.0), lam, 12)
    # x^2 = (C_2 + lam) / (2 lam (lam + 1)) in C^(lam)
    assert coeffs[0] == pytest.approx(1.0 / (2 * (lam + 1)), rel=1e-12)
    assert coeffs[2] == pytest.approx(1.0 / (2 * lam * (lam + 1)), rel=1e-12)
    x = np.linspace(-1, 1, 51)
    assert np.max(np.abs(us.synthesize(coeffs, lam, x) - x * x)) <= 1e-12


def test_expand_potential_reports_nonconvergence():
    with pytest.raises(solver.ExpansionError):
        solver.expand_potential(lambda x: np.abs(x) ** 0.5, Interval(-1.0, 1.0), 0.5, 8)


def test_potential_requires_single_interval():
    spec = ProblemSpec(0.5, potential=lambda x: x * x)
    with pytest.raises(ValueError):
        solver.solve(spec, SymmetricPair(0.2, 0.6))


def test_two_interval_solution_is_symmetric():
    sol = solver.solve_two_interval(ProblemSpec(4.0, 1.61, n=30), 0.34, 0.57)
    x = np.linspace(0.35, 0.56, 11)
    assert np.allclose(sol.density(x), sol.density(-x), rtol=1e-12, atol=1e-12)
    assert sol.mass_check == pytest.approx(1.0, rel=1e-12)
    left, right = sol.measure
    assert left.support == (-0.57, -0.34)


def test_solution_json_roundtrip():
    sol = solve_interval(ProblemSpec(2.0, 1.5, n=10), -0.7, 0.7)
    data = json.loads(sol.to_json())
    assert data["support"] == [[-0.7, 0.7]]
    assert len(data["coeffs"]) == 10
    assert data["n"] == 10


def test_min_density_sees_negative_edges():
    # beyond the optimal radius the beta < 1 density turns negative at the edges
    spec = ProblemSpec(2.0, -0.5, n=30)
    R = closed_form_radius(spec)
    assert solve_interval(spec, -1.01 * R, 1.01 * R).min_density < -1e-3
    assert solve_interval(spec, -0.99 * R, 0.99 * R).min_density > 1e-3
    assert abs(solve_interval(spec, -R, R).min_density) < 1e-12


@settings(max_examples=10)
@given(pair=st.sampled_from([(2.0, 1.5), (2.5, 2.0), (2.0, 0.5), (7 / 3, 2.0)]), mass=st.floats(0.1, 10.0))
def test_residual_small_at_exact_radius(pair, mass):
    spec = ProblemSpec(*pair, mass=mass, n=40)
    R = closed_form_radius(spec)
    sol = solve_interval(spec, -R, R)
    assert sol.residual <= 1e-9 * abs(sol.energy)
    assert sol.mass_check == pytest.approx(mass, rel=1e-12)
