"""Exception hierarchy shared by all modules."""


class GevreyError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(GevreyError, ValueError):
    """Invalid parameter or configuration value."""


class StateError(GevreyError, ValueError):
    """A field violates a structural requirement (e.g. solenoidality)."""


class NoSolutionError(GevreyError, ArithmeticError):
    """A scalar equation has no admissible root for the given input."""


class TransformError(GevreyError, ArithmeticError):
    """A spectral transformation could not be evaluated."""


class DiagnosticUnavailable(GevreyError):
    """Not enough data to evaluate a diagnostic."""


class BlowUpError(GevreyError, FloatingPointError):
    """Time integration produced a non-finite or runaway state."""

    def __init__(self, message: str, last_valid_time: float = 0.0):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class ReportIncomplete(GevreyError):
    """A run series lacks a diagnostic that certification needs."""


class SchemaError(GevreyError, ValueError):
    """A stored artifact does not match the expected schema."""
