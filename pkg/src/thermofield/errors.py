"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Index extents do not match."""


class NumericalError(ArithmeticError):
    """Non-finite data or a failed factorization."""


class ParameterError(ValueError):
    """Invalid model or algorithm parameter."""


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


class RangeError(IndexError):
    """Site or bond index out of range."""


class SizeError(MemoryError):
    """A dense object would exceed the configured size cap."""


class DataError(ValueError):
    """Malformed or insufficient data for an analysis."""


class ResourceExhaustedError(RuntimeError):
    """Raised by the evolution loop when the resource budget is exceeded.

    ``state`` holds the last state that was handed to the observer, so the
    run can be checkpointed and resumed from a measurement point.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ParseError(DataError):
    """A result file or config could not be parsed; ``line`` points at the culprit."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
