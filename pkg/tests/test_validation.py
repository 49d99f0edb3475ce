import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from eqmeasure.solver import ProblemSpec, solve_interval
from eqmeasure.ultraspherical import WeightedExpansion
from eqmeasure.validation import (
    ConvergenceError,
    UnsupportedParametersError,
    analytic_solution,
    coefficient_decay_report,
    histogram_compare,
    measure_cdf,
    particle_simulate,
    root_search_measure,
    sample_measure,
)


@pytest.mark.parametrize("alpha,beta,mass", [(2.0, 1.5, 1.0), (7 / 3, 2.0, 3.0), (2.0, 0.5, 2.0), (2.0, -0.5, 1.0)])
def test_analytic_density_integrates_to_mass(alpha, beta, mass):
    sol = analytic_solution(alpha, beta, mass)
    total = integrate.quad(lambda x: float(sol.density(np.array([x]))[0]), -sol.radius, sol.radius, limit=200)[0]
    assert total == pytest.approx(mass, rel=1e-7)
    assert sol.cdf(sol.radius) == pytest.approx(mass, rel=1e-14)


def test_analytic_solution_rejects_other_pairs():
    with pytest.raises(UnsupportedParametersError):
        analytic_solution(3.0, 1.5)
    with pytest.raises(UnsupportedParametersError):
        analytic_solution(1.5, 2.0)


@settings(max_examples=20)
@given(seed=st.integers(0, 2**31), lam=st.floats(-0.4, 2.0).filter(lambda v: abs(v) > 0.05))
def test_measure_cdf_matches_quadrature(seed, lam):
    rng = np.random.default_rng(seed)
    m = WeightedExpansion(lam, rng.standard_normal(6), (-0.4, 1.3))
    x = float(rng.uniform(-0.4, 1.3))
    ref = integrate.quad(lambda y: float(m(np.array([y]))[0]), -0.4, x, limit=200, epsabs=1e-12)[0]
    assert float(measure_cdf(m, x)) == pytest.approx(ref, abs=1e-8 * max(1.0, np.abs(m.coeffs).sum()))


def test_measure_cdf_matches_analytic():
    exact = analytic_solution(2.0, 1.5)
    sol = solve_interval(ProblemSpec(2.0, 1.5, n=30), -exact.radius, exact.radius)
    x = np.linspace(-exact.radius, exact.radius, 41)
    assert np.max(np.abs(measure_cdf(sol.measure, x) - exact.cdf(x))) <= 1e-10


def test_two_particles_settle_at_unit_distance():
    # K'(r) = r^(a-1) - r^(b-1) vanishes at r = 1
    state = particle_simulate(2.0, 1.5, n=2, steps=20000, init=np.array([-0.1, 0.2]))
    assert abs(state.positions[1] - state.positions[0]) == pytest.approx(1.0, abs=1e-8)
    assert state.positions.mean() == pytest.approx(0.05, abs=1e-12)


def test_center_of_mass_conserved():
    state = particle_simulate(3.0, 1.2, n=200, steps=500, seed=4, tol=0.0)
    rng = np.random.default_rng(4)
    start = rng.uniform(-1.0, 1.0, 200)
    assert state.positions.mean() == pytest.approx(start.mean(), abs=1e-12)
    assert state.iteration == 500 and not state.converged


def test_particle_histogram_matches_analytic():
    exact = analytic_solution(2.0, 1.5)
    state = particle_simulate(2.0, 1.5, n=1000, seed=2, tol=1e-7, coarse=200)
    assert state.converged
    ks, l1 = histogram_compare(state, exact)
    assert ks <= 0.03 and l1 <= 0.1


def test_sampling_recovers_measure():
    sol = solve_interval(ProblemSpec(2.0, 1.5, n=30), -0.8, 0.8)
    draws = sample_measure(sol, 20000, seed=1)
    assert np.all(np.abs(draws) <= 0.8)
    state = type("S", (), {"positions": draws})()
    ks, _ = histogram_compare(state, sol, center=False)
    assert ks <= 0.015


def test_root_search_quadratic_potential():
    spec = ProblemSpec(0.5, potential=lambda x: x * x, n=40)
    res = root_search_measure(spec, 6)
    assert res.support.b == pytest.approx(-res.support.a, abs=1e-10)
    assert res.support.b == pytest.approx(0.73909899545, abs=1e-9)
    assert res.residual <= 1e-10


def test_root_search_argument_checks():
    with pytest.raises(ValueError):
        root_search_measure(ProblemSpec(0.5, potential=lambda x: x * x), 1)
    with pytest.raises(ValueError):
        root_search_measure(ProblemSpec(2.0, 1.5), 6)


def test_root_search_reports_failure(monkeypatch):
    from scipy import optimize

    from eqmeasure import validation

    def stalled(fun, x0, method=None, options=None):
        return optimize.OptimizeResult(x=np.asarray(x0), fun=fun(x0), success=False, message="stalled", nfev=1)

    monkeypatch.setattr(validation.optimize, "root", stalled)
    spec = ProblemSpec(0.5, potential=lambda x: x * x, n=40)
    with pytest.raises(ConvergenceError):
        root_search_measure(spec, 6)


def test_coefficient_decay_report():
    sol = solve_interval(ProblemSpec(2.5, 1.2, n=40), -0.9, 0.9)
    rep = coefficient_decay_report(sol)
    assert len(rep["abs_coeffs"]) == 40
    assert {"plateau", "rate", "first_below"} <= set(rep)
    assert math.isfinite(rep["plateau"])
