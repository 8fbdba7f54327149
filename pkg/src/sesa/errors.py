"""Exception types shared across the library."""


class SesaError(Exception):
    """Base class for all errors raised by this library."""


class DimensionError(SesaError, ValueError):
    """Operands have incompatible or invalid shapes."""


class DegenerateInputError(SesaError, ValueError):
    """Input is mathematically degenerate for the operation (e.g. zero norm)."""


class RangeError(SesaError, ValueError):
    """A numeric argument is outside its allowed range."""


class EmptyVocabularyError(SesaError, ValueError):
    """No entry survived vocabulary construction."""


class ParseError(SesaError, ValueError):
    """A file could not be parsed. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConsistencyError(SesaError, ValueError):
    """Two objects that must match (e.g. a forward cache and its params) do not."""


class NumericError(SesaError, ArithmeticError):
    """A non-finite value appeared where finite numbers are required."""


class UndefinedMetricError(SesaError, ValueError):
    """The requested metric is undefined for the given data (e.g. single-class AUC)."""


class ModelLoadError(SesaError, ValueError):
    """A model file is corrupt, truncated, or internally inconsistent."""


class UsageError(SesaError):
    """Bad command-line invocation."""
