class CiarletError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CiarletError, ValueError):
    """An argument lies outside the operation's domain."""


class CapabilityError(CiarletError, NotImplementedError):
    """A valid request that this package does not support."""


class SingularityError(CiarletError, ZeroDivisionError):
    """Evaluation at a pyramid apex, where rationomial denominators vanish."""


class DegenerateElementError(CiarletError, ValueError):
    """The dual matrix is singular: the functionals are not unisolvent.

    ``null_combination`` holds the coefficients of the near-null combination
    of functionals."""

    def __init__(self, message, null_combination=None):
        super().__init__(message)
        self.null_combination = null_combination


class ConfigurationError(CiarletError, ValueError):
    """Invalid span-test configuration."""
