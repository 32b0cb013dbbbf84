"""Shared exception types."""


class ToolkitError(Exception):
    """Base class for all sdlab-specific errors."""


class DomainError(ToolkitError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class AccuracyError(ToolkitError, ArithmeticError):
    """The requested tolerance cannot be met with the given parameters."""


class PrincipalCharacterError(DomainError):
    """A non-principal Dirichlet character is required."""


class CapacityError(ToolkitError, ValueError):
    """Size guard exceeded (memory or range limit)."""


class NonInvertibleError(DomainError):
    """Dirichlet inversion needs a nonzero leading coefficient."""


class LimitMismatchError(ToolkitError, ValueError):
    """Coefficient vectors must share the same limit."""


class EmptyIntervalError(ToolkitError, ValueError):
    """No qualifying integers in the requested interval."""


class SingularLeadError(DomainError):
    """Series log/pow needs a nonzero constant term."""


class BoundaryZeroError(ToolkitError, ArithmeticError):
    """Box boundary too close to a zero for stable classification."""


class ContourBlockedError(ToolkitError, RuntimeError):
    """No room to route the contour past the marked boxes."""

    def __init__(self, column: int, message: str = ""):
        self.column = column
        super().__init__(message or f"contour blocked at column k={column}")


class ConvergenceError(ToolkitError, ArithmeticError):
    """A series is not absolutely convergent where the check needs it."""
