"""Exception types shared across the package."""


class DataError(ValueError):
    """Raised for malformed or invalid input data."""


class ParseError(DataError):
    """Raised when a CSV file cannot be parsed into a rectangular table."""


class ValidationError(DataError):
    """Raised when parsed data violates a dataset invariant."""


class DomainError(ValueError):
    """Raised when a graph operation receives an argument outside its domain."""


class StateCorruptionError(RuntimeError):
    """Raised when sampler bookkeeping is found to be inconsistent."""


class NumericError(ArithmeticError):
    """Raised when a sampler weight or acceptance ratio is not finite."""


class ConfigError(ValueError):
    """Raised for missing or invalid configuration keys."""
