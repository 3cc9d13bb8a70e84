"""Canonical forms, strong ellipticity and quadratic energies for
second-order 2x2 elliptic systems with constant coefficients."""
from .canonical import CanonicalReport, canonicalize, strong_ellipticity_direct
from .energy import EnergyMatrix, construct_energy_matrix, energy_decision, euler_lagrange_system
from .errors import EllipticCanonError
from .system_model import ComplexEquation, SystemSpec, from_canonical_params, from_complex_equation, is_elliptic

__all__ = [
    "CanonicalReport",
    "ComplexEquation",
    "EllipticCanonError",
    "EnergyMatrix",
    "SystemSpec",
    "canonicalize",
    "construct_energy_matrix",
    "energy_decision",
    "euler_lagrange_system",
    "from_canonical_params",
    "from_complex_equation",
    "is_elliptic",
    "strong_ellipticity_direct",
]

__version__ = "0.1.0"
