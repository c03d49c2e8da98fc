"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``ParameterDomainError`` and
``ConfigValidationError`` exit with 2, ``CapabilityError`` and
``AccuracyError`` with 3.
"""


class DickmanError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(DickmanError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigValidationError(DickmanError, ValueError):
    """A run configuration failed schema validation."""


class CapabilityError(DickmanError):
    """The request is well-formed but outside what the implementation supports."""


class AccuracyError(DickmanError):
    """A numerical tolerance could not be reached within the step budget."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
