"""Equilibrium measures of attractive-repulsive power-law interactions by a
sparse ultraspherical spectral method."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .operators import build_far_operator, build_operator, classify, popov_diagonal, select_lambda, write_triplets
from .optimize import (
    OptimizeConfig,
    energy_contour,
    gap_scan,
    optimize_interval,
    optimize_radius,
    optimize_two_interval,
)
from .solver import (
    EquilibriumSolution,
    Interval,
    ProblemSpec,
    SymmetricPair,
    assemble_system,
    normalize_and_energy,
    solve,
    solve_direct,
    solve_tikhonov,
    solve_two_interval,
    solve_with_potential,
)
from .validation import (
    analytic_solution,
    coefficient_decay_report,
    histogram_compare,
    particle_simulate,
    root_search_measure,
)

__all__ = [
    "BACKEND",
    "EquilibriumSolution",
    "Interval",
    "OptimizeConfig",
    "ProblemSpec",
    "SymmetricPair",
    "analytic_solution",
    "assemble_system",
    "build_far_operator",
    "build_operator",
    "classify",
    "coefficient_decay_report",
    "energy_contour",
    "gap_scan",
    "histogram_compare",
    "normalize_and_energy",
    "optimize_interval",
    "optimize_radius",
    "optimize_two_interval",
    "particle_simulate",
    "popov_diagonal",
    "root_search_measure",
    "select_lambda",
    "solve",
    "solve_direct",
    "solve_tikhonov",
    "solve_two_interval",
    "solve_with_potential",
    "write_triplets",
]
