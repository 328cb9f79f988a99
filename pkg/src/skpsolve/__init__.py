"""Variational solver for the Kirchhoff equation with a Poisson potential.

    -(a + b |grad u|_2^2) Laplace(u) + phi_u u = f(x, u),   -Laplace(phi_u) = u^2,

with zero Dirichlet data on the unit interval or square.
"""

from .domain import (DiscreteDomain, SpectralBasis, build_domain, eigenbasis,
                     random_function, sobolev_constant)
from .energy import EnergyBreakdown, GradientVector, Problem, State, ar_gap, energy, gradient
from .exceptions import CalibrationError, ConfigurationError, HypothesisViolation, ParameterError
from .nonlinearity import NonlinearitySpec, ar_check, growth_bound
from .operator import ConeGeometry, apply_A, cone_contraction_check, estimate_delta_m
from .poisson import PoissonSolution, phi_bound_constant, solve_phi

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "ConeGeometry", "ConfigurationError", "DiscreteDomain",
    "EnergyBreakdown", "GradientVector", "HypothesisViolation", "NonlinearitySpec",
    "ParameterError", "PoissonSolution", "Problem", "SpectralBasis", "State", "apply_A",
    "ar_check", "ar_gap", "build_domain", "cone_contraction_check", "eigenbasis", "energy",
    "estimate_delta_m", "gradient", "growth_bound", "phi_bound_constant", "random_function",
    "sobolev_constant", "solve_phi",
]
