"""Numerical companion to the critical exponent of -div A(x, u, Du) >= f(u).

The main entry points are re-exported here; see the submodules for the
full interfaces.
"""
__version__ = "0.1.0"

from .core import (Custom, Forcing, OperatorDescriptor, PowerLaw, PowerLog,
                   ProblemParams, RadialGrid, RadialProfile, Regularized, Tabulated,
                   Zero, check_structure, parse_nonlinearity, parse_operator)
from .criterion import classify_criterion, critical_exponent, regularize
from .barrier import BarrierParams, forcing_function, moment_report
from .radial import certify_supersolution, decay_metrics, delta_search, solve_radial
from .potential import RadialMeasure, ball_measure, wolff_potential
from .galerkin import RadialFemSpace, assemble, hardy_check, solve_system

__all__ = [
    "Custom", "Forcing", "OperatorDescriptor", "PowerLaw", "PowerLog", "ProblemParams",
    "RadialGrid", "RadialProfile", "Regularized", "Tabulated", "Zero", "check_structure",
    "parse_nonlinearity", "parse_operator", "classify_criterion", "critical_exponent",
    "regularize", "BarrierParams", "forcing_function", "moment_report",
    "certify_supersolution", "decay_metrics", "delta_search", "solve_radial",
    "RadialMeasure", "ball_measure", "wolff_potential", "RadialFemSpace", "assemble",
    "hardy_check", "solve_system",
]
