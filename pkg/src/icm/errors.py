"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so the split between
validation and numerical failures matters.
"""


class IcmError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class ValidationError(IcmError, ValueError):
    """A value violates a documented invariant or precondition."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ParseError(IcmError, ValueError):
    """Malformed input text (CSV row, scenario entry, unit suffix)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedLoadError(IcmError, ValueError):
    """The requested termination is outside what an operation can model."""


class NumericalError(IcmError, ArithmeticError):
    exit_code = 2


class PoleError(NumericalError):
    """Transfer function evaluated on (or numerically at) a pole."""

    def __init__(self, message, magnitude):
        super().__init__(message)
        self.magnitude = magnitude


class NumericalInstabilityError(NumericalError):
    """The transient integration left its divergence bound."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class NotSettledError(NumericalError):
    """A step-response threshold was never crossed."""


class PropertyViolation(IcmError):
    """A sweep violated a monotonicity or flatness claim made for it."""

    exit_code = 3

    def __init__(self, message, row_index=None):
        super().__init__(message)
        self.row_index = row_index
