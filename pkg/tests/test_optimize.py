import math

import numpy as np
import pytest

from eqmeasure.optimize import (
    NoAdmissibleMeasureError,
    OptimizeConfig,
    closed_form_radius,
    edge_values,
    energy_contour,
    gap_scan,
    normalization_energy,
    optimize_interval,
    optimize_radius,
    optimize_two_interval,
    radius_candidates,
)
from eqmeasure.solver import POSITIVITY_TOL, ProblemSpec
from eqmeasure.validation import analytic_solution


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizeConfig(method="bfgs")
    with pytest.raises(ValueError):
        OptimizeConfig(tol_x=0.0)
    with pytest.raises(ValueError):
        OptimizeConfig(bracket=(2.0, 1.0))
    with pytest.raises(ValueError):
        OptimizeConfig(scan_points=2)


def test_closed_form_radius_families():
    assert closed_form_radius(ProblemSpec(2.0, 1.5)) == pytest.approx(analytic_solution(2.0, 1.5).radius)
    assert closed_form_radius(ProblemSpec(2.5, 2.0)) is not None
    assert closed_form_radius(ProblemSpec(3.0, 1.5)) is None
    assert closed_form_radius(ProblemSpec(2.0, 1.0 - 1e-9)) is not None


def test_normalization_energy_gradient_matches_differences():
    spec = ProblemSpec(2.0, 1.5, n=30)
    R, h = 0.9, 1e-5
    E, g, _ = normalization_energy(spec, R)
    Ep = normalization_energy(spec, R + h, grad=False)[0]
    Em = normalization_energy(spec, R - h, grad=False)[0]
    assert g == pytest.approx((Ep - Em) / (2 * h), rel=1e-5)


@pytest.mark.parametrize("method", ["newton-linesearch", "golden-section", "nelder-mead"])
def test_optimize_radius_methods(method):
    spec = ProblemSpec(2.0, 1.5, n=30)
    sol = optimize_radius(spec, OptimizeConfig(method=method, warm_start=False))
    exact = closed_form_radius(spec)
    tol = 1e-8 if method == "newton-linesearch" else 1e-6
    assert abs(sol.support.b - exact) <= tol
    assert sol.support.a == -sol.support.b
    assert sol.admissible


@pytest.mark.parametrize("beta", [-0.5, 0.5])
def test_vanishing_edge_optimum_is_boundary_candidate(beta):
    spec = ProblemSpec(2.0, beta, n=40)
    sol = optimize_radius(spec, OptimizeConfig(warm_start=False))
    assert sol.diagnostics["candidate_kind"] == "boundary"
    assert abs(sol.support.b - closed_form_radius(spec)) <= 1e-8


def test_radius_independent_of_mass():
    a = optimize_radius(ProblemSpec(2.5, 1.2, mass=1.0, n=30))
    b = optimize_radius(ProblemSpec(2.5, 1.2, mass=4.0, n=30))
    assert a.support.b == pytest.approx(b.support.b, rel=1e-9)


def test_no_admissible_measure_reports_curve():
    spec = ProblemSpec(4.0, 1.61, n=30)
    with pytest.raises(NoAdmissibleMeasureError) as info:
        optimize_radius(spec)
    assert info.value.curve is not None
    sol = optimize_radius(spec, require_admissible=False)
    assert sol.min_density < POSITIVITY_TOL


def test_radius_candidates_structure():
    cands, curve = radius_candidates(ProblemSpec(2.0, 1.5, n=30), OptimizeConfig(warm_start=False))
    assert cands
    assert len(curve["radius"]) == 2000


def test_potential_support_is_symmetric_for_even_potential():
    spec = ProblemSpec(0.5, potential=lambda x: x * x, n=40)
    sol = optimize_interval(spec)
    assert sol.support.a == pytest.approx(-sol.support.b, abs=1e-10)
    assert np.max(np.abs(edge_values(spec, sol.support.a, sol.support.b))) <= 1e-10
    assert sol.admissible


def test_potential_support_matches_radius_search_for_even_potential():
    spec = ProblemSpec(0.5, potential=lambda x: x * x, n=40)
    a = optimize_interval(spec)
    b = optimize_radius(spec, OptimizeConfig(scan_points=100, bracket=(0.3, 2.0)))
    assert a.support.b == pytest.approx(b.support.b, abs=1e-9)


def test_asymmetric_potential_support():
    spec = ProblemSpec(-2 / 3, potential=lambda x: -(x**4) + np.sin(x), mass=5 / 3, n=50)
    sol = optimize_interval(spec)
    assert sol.support.a == pytest.approx(-1.31839941071, abs=1e-7)
    assert sol.support.b == pytest.approx(1.47097530917, abs=1e-7)
    assert sol.admissible


def test_optimize_radius_rejects_odd_potential():
    with pytest.raises(ValueError):
        optimize_radius(ProblemSpec(0.5, potential=lambda x: x**3 + x * x, n=20))


def test_gap_scan_small_lattice():
    res = gap_scan([4.0, 1.0], [1.3, 1.7])
    rows = list(res.rows())
    assert len(rows) == 4
    assert (1.0, 1.3) in res.failures and (1.0, 1.7) in res.failures
    assert math.isnan(res.min_density[1, 0])
    assert res.min_density[0, 0] > 0 > res.min_density[0, 1]
    assert len(res.crossings(4.0)) == 1


def test_energy_contour_marks_admissible_cells():
    spec = ProblemSpec(4.0, 1.61, n=30)
    c = energy_contour(spec, np.linspace(0.32, 0.35, 3), np.linspace(0.56, 0.58, 3))
    assert c.energy.shape == (3, 3)
    assert c.admissible.dtype == bool
    assert c.best() is None or c.admissible.any()


def test_two_interval_rejects_bad_init():
    with pytest.raises(ValueError):
        optimize_two_interval(ProblemSpec(4.0, 1.61, n=30), init=(0.5, 0.4))


def test_two_interval_refuses_admissible_single_interval():
    with pytest.raises(ValueError):
        optimize_two_interval(ProblemSpec(2.0, 1.5, n=30), init=(0.2, 0.8))


def test_two_interval_from_given_guess():
    spec = ProblemSpec(4.0, 1.61, n=40)
    sol = optimize_two_interval(spec, init=(0.33, 0.57))
    assert sol.admissible
    assert 0.30 < sol.support.a < 0.37 and 0.55 < sol.support.b < 0.60
    assert sol.diagnostics["verdict"]
