"""Lévy processes seen from their supremum: simulation of the two-sided
process Z, the conditioned process Y, fluctuation constants and the
particle-system representations of the associated max-stable process.
"""

from .models import (
    DomainError,
    DoubleExpJumps,
    GaussianJumps,
    LevyModel,
    ModelDiagnostics,
    OneSidedExpJumps,
    ThetaDomain,
    esscher_tilt,
    psi,
    psi_prime,
    validate,
)
from .fluctuation import (
    ApplicabilityError,
    FluctuationConstants,
    NoRoot,
    NotDrifting,
    c0,
    c_killed,
    find_nu,
    fluctuation_constants,
    ladder_exponents,
    phi,
)

__version__ = "0.1.0"

__all__ = [
    "ApplicabilityError",
    "DomainError",
    "DoubleExpJumps",
    "FluctuationConstants",
    "GaussianJumps",
    "LevyModel",
    "ModelDiagnostics",
    "NoRoot",
    "NotDrifting",
    "OneSidedExpJumps",
    "ThetaDomain",
    "c0",
    "c_killed",
    "esscher_tilt",
    "find_nu",
    "fluctuation_constants",
    "ladder_exponents",
    "phi",
    "psi",
    "psi_prime",
    "validate",
]
