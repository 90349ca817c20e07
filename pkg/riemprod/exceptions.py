"""Exception hierarchy for the tensor laboratory."""
from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from riemprod.models import ResidualReport


class RiemprodError(Exception):
    """Base class for all laboratory errors."""
    pass


class InvalidInputError(RiemprodError, ValueError):
    """Raised for shape/dimension mismatches and malformed inputs."""

    def __init__(self, message: str, report: Optional["ResidualReport"] = None):
        super().__init__(message)
        self.report = report


class PredicateError(InvalidInputError):
    """Raised when a tensor fails the symmetry predicate an operation requires."""
    pass


class DomainError(RiemprodError, ValueError):
    """Raised when a quantity is mathematically undefined for the given input."""
    pass


class GenerationError(RiemprodError, RuntimeError):
    """Raised when a seeded generator exhausts its retry budget."""
    pass


class TrialTimeoutError(RiemprodError):
    """Raised when a verification trial exceeds its time budget."""
    pass
