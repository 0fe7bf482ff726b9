"""Lower-order terms in the 1-level density of two elliptic curve families."""

from .errors import AdmissibilityError, DomainError, NumericError, ResourceError
from .families import F1, F2, Curve, FamilyParams, ScaledFamily, scale, validate_and_residues

__all__ = [
    "AdmissibilityError",
    "DomainError",
    "NumericError",
    "ResourceError",
    "F1",
    "F2",
    "Curve",
    "FamilyParams",
    "ScaledFamily",
    "scale",
    "validate_and_residues",
]
__version__ = "0.1.0"
