"""
Exception hierarchy for Restriction Lab.

Every error carries a human-readable message, an optional hint and the
process exit code the CLI maps it to.
"""

from __future__ import annotations


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class LabError(Exception):
    """Base exception for all Restriction Lab errors.

    Attributes:
        message: Human-readable error message.
        hint: Optional hint for resolving the error.
        exit_code: Exit code used by the command line entry point.
    """

    exit_code: int = EXIT_NUMERICAL

    def __init__(self, message: str, hint: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.hint = hint

    def __str__(self) -> str:
        parts = [self.message]
        if self.hint:
            parts.append(f"(Hint: {self.hint})")
        return " ".join(parts)


class DomainError(LabError):
    """Raised when a point, grid or density lies outside the admissible domain.

    For example a chart point outside the surface patch, an empty
    evaluation grid, or a density that is not sampled on a product grid.
    """

    def __init__(self, message: str = "Point outside domain", hint: str | None = None) -> None:
        super().__init__(message, hint=hint)


class SingularPointError(DomainError):
    """Raised at the vertex of the cone, where dξ/|ξ| is singular."""

    def __init__(self, message: str = "Singular point", hint: str | None = None) -> None:
        super().__init__(message, hint=hint or "The cone chart excludes ξ = 0")


class NumericalError(LabError):
    """Raised when a numerical estimate is not finite or cannot be trusted."""

    def __init__(self, message: str = "Numerical failure", hint: str | None = None) -> None:
        super().__init__(message, hint=hint)


class RefinementError(NumericalError):
    """Raised when a grid is too coarse for the requested evaluation.

    The anti-aliasing rule requires h · max|x| · 2π ≤ bound, where h is the
    surface-grid spacing and x ranges over the evaluation points.
    """

    def __init__(self, message: str = "Grid too coarse", hint: str | None = None) -> None:
        super().__init__(message, hint=hint or "Refine the surface grid or shrink the box")


class PreconditionError(LabError):
    """Raised when an operation's precondition does not hold.

    Exponent arithmetic that does not close, δ ≥ a in a slice problem,
    or a fit requested on an identically vanishing density.
    """

    def __init__(self, message: str = "Precondition violated", hint: str | None = None) -> None:
        super().__init__(message, hint=hint)


class ModeError(PreconditionError):
    """Raised when whole-cone mode is requested for non scale invariant exponents."""

    def __init__(self, message: str = "Mode not available", hint: str | None = None) -> None:
        super().__init__(message, hint=hint or "Use compact mode or scale invariant exponents")


class UnsupportedError(LabError):
    """Raised for parameter combinations outside the implemented range."""

    def __init__(self, message: str = "Unsupported", hint: str | None = None) -> None:
        super().__init__(message, hint=hint)


class ConfigurationError(LabError):
    """Raised when configuration is invalid.

    Attributes:
        line: 1-based line number in the config file, if known.
        key: Offending field name, if known.
    """

    exit_code = EXIT_CONFIG

    def __init__(
        self,
        message: str = "Configuration error",
        hint: str | None = None,
        line: int | None = None,
        key: str | None = None,
    ) -> None:
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"field '{key}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message, hint=hint)
        self.line = line
        self.key = key


# Type guard functions
def is_lab_error(error: Exception) -> bool:
    """Check if an exception is a LabError."""
    return isinstance(error, LabError)


def is_refinement_error(error: Exception) -> bool:
    """Check if an exception is a RefinementError."""
    return isinstance(error, RefinementError)


def exit_code_for(error: Exception) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, LabError):
        return error.exit_code
    # pydantic validation failures are schema violations
    if type(error).__name__ == "ValidationError":
        return EXIT_CONFIG
    return EXIT_NUMERICAL
