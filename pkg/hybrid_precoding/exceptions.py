"""Errors raised by the hybrid precoding package."""


class HybridPrecodingError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(HybridPrecodingError):
    """Raised if dimensions, budgets or config values are inconsistent."""


class DomainError(HybridPrecodingError, ValueError):
    """Raised if an argument lies outside the domain of a model function."""


class NumericalError(HybridPrecodingError):
    """Raised if a numerical routine cannot reach its contract."""
