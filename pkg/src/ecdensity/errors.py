class DomainError(ValueError):
    """An argument violates the precondition of an operation."""


class AdmissibilityError(DomainError):
    """Family congruence data or a curve fails the coprimality conditions."""

    def __init__(self, message: str, prime: int | None = None):
        super().__init__(message)
        self.prime = prime


class ResourceError(RuntimeError):
    """A request exceeds a configured computational cap."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""
