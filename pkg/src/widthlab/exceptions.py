class WidthLabError(Exception):
    """Base class for all errors raised by widthlab."""


class DomainError(WidthLabError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class BudgetExceededError(WidthLabError):
    """A combinatorial enumeration would exceed its configured budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class OracleSizeError(BudgetExceededError):
    """The exhaustive support oracle was asked to run on too large an N."""


class ConfigError(WidthLabError, ValueError):
    """An experiment or CLI configuration is malformed."""
