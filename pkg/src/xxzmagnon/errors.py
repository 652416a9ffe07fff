"""Exception types shared across the package.

The CLI maps these onto exit codes: bad inputs exit 1, violated numerical
invariants exit 2.
"""


class ChainError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(ChainError, ValueError):
    """Invalid argument or configuration (out-of-range site, bad grid, ...)."""


class CapabilityError(ChainError, ValueError):
    """Request outside the supported envelope (size caps, mode restrictions)."""


class InvariantViolationError(ChainError, ArithmeticError):
    """A numerical invariant that should hold by construction was breached."""


class NumericalError(ChainError, ArithmeticError):
    """Numerical procedure failed (integrator step failure, non-convergence)."""


class InsufficientDataError(ChainError, ValueError):
    """Not enough usable samples for a fit or estimate."""


class IncompleteDataError(ChainError, ValueError):
    """An input series does not reach the feature being estimated."""


class NotFoundError(ChainError, LookupError):
    """A searched-for feature does not exist in the data; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
