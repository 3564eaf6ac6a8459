"""
Critical graphs of the quadratic differentials ``-q(z)/z dz^2`` with ``q`` a
monic cubic, the curve Sigma that separates their short-trajectory
topologies, and the limit root measure of the quasi-exactly solvable sextic
oscillator whose Cauchy transform solves

    z C^2 - (z^2 + gamma z/2) C + (z + delta/4) = 0.
"""

from .algebra import Poly, TriMatrix, eig_tridiagonal, poly_roots
from .errors import (
    BranchJump,
    DegenerateError,
    DegreeError,
    DomainError,
    NoMeasure,
    NotApplicable,
    PathTooClose,
    QDError,
)
from .measure import cauchy_closed_form, cauchy_numeric, support, total_mass
from .periods import classify_apex, sigma_value, snap_to_sigma, trace_sigma
from .qdiff import QuadDifferential, critical_points, from_apex, from_parameters, from_roots_qd
from .spectral import SpectralProblem, delta_estimates, spectrum
from .tracer import Budget, build_critical_graph

__version__ = "0.1.0"

__all__ = [
    "Poly",
    "TriMatrix",
    "eig_tridiagonal",
    "poly_roots",
    "QDError",
    "DegreeError",
    "DomainError",
    "NotApplicable",
    "BranchJump",
    "PathTooClose",
    "DegenerateError",
    "NoMeasure",
    "QuadDifferential",
    "from_apex",
    "from_parameters",
    "from_roots_qd",
    "critical_points",
    "Budget",
    "build_critical_graph",
    "classify_apex",
    "sigma_value",
    "snap_to_sigma",
    "trace_sigma",
    "SpectralProblem",
    "spectrum",
    "delta_estimates",
    "support",
    "total_mass",
    "cauchy_closed_form",
    "cauchy_numeric",
]
