"""Exception types raised across the package."""


class BernWassError(Exception):
    """Base class for all errors raised by bernwass."""


class InvalidMatrix(BernWassError, ValueError):
    pass


class NotPsd(InvalidMatrix):
    pass


class DimMismatch(BernWassError, ValueError):
    pass


class DomainError(BernWassError, ValueError):
    pass


class EmptyData(BernWassError, ValueError):
    pass


class DegenerateInput(BernWassError, ValueError):
    pass


class TooFewPoints(BernWassError, ValueError):
    pass


class ConfigError(BernWassError, ValueError):
    pass


class ParseError(BernWassError, ValueError):
    """Malformed input file; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(BernWassError, ArithmeticError):
    pass
