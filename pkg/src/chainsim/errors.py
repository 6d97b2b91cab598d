"""Exception types shared across the package."""


class ChainsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ChainsimError, ValueError):
    """Invalid distribution/model/cost parameters or malformed config input."""


class NumericalError(ChainsimError, ArithmeticError):
    """A numerical routine failed to reach the requested accuracy."""

    def __init__(self, message: str, achieved_error: float | None = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class ResolutionError(NumericalError):
    """A grid is too coarse (or would be too large) for the requested accuracy."""

    def __init__(self, message: str, suggested_step: float | None = None):
        super().__init__(message)
        self.suggested_step = suggested_step


class RunawayError(ChainsimError, RuntimeError):
    """A replication exceeded the cycle cap: the per-cycle hack probability is
    numerically zero and the simulation would never terminate."""


class UnderflowError(NumericalError):
    """An intermediate probability underflowed; analytic evaluation is not
    meaningful and Monte Carlo should be used instead."""
