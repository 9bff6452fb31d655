"""Euler-Arnold tops on sl(2,C) and their two-body Calogero-Moser counterparts."""

from .algebra import (
    ChevalleyState,
    QuadraticForm,
    SpinState,
    casimir,
    check_automorphism,
    conjugate,
    convert_basis,
    top_hamiltonian,
    top_vector_field,
)
from .bosonisation import Elliptic, PhasePoint, Rational, Trigonometric, bosonise, coefficients, pullback_coeffs
from .canonical import XXXprime, XXZprime, XYZ, classify, reduce
from .dynamics import IntegratorConfig, Trajectory, conserved_drift, integrate_cm, integrate_top
from .equivalence import GaugeTransform, bracket_residuals, degeneration_limit, trajectory_equivalence
from .special import complete_elliptic, jacobi_elliptic, theta, weierstrass_paper

__version__ = "0.1.0"
