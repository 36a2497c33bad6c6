"""Exception types raised across the package."""


class SpinBosonError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinBosonError, ValueError):
    """Parameters or configuration violate a model invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConfigError(SpinBosonError, ValueError):
    """A configuration document is malformed or contains unknown keys."""


class TruncationError(SpinBosonError, ValueError):
    """The Fock cutoff is too small for the requested state."""


class UnsupportedRegimeError(SpinBosonError, ValueError):
    """A closed form was requested outside the regime where it holds."""


class DomainError(SpinBosonError, ValueError):
    """Argument outside the supported numerical domain."""


class InconsistentMeasurementError(SpinBosonError, ValueError):
    """Measured values cannot be produced by the model."""


class NumericalError(SpinBosonError, RuntimeError):
    """A numerical routine failed (diagonalization, step-size audit, ...)."""
