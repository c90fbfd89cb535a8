"""Exception hierarchy shared across the package."""


class WhiterError(Exception):
    """Base class for all errors raised by whiter."""


class DomainError(WhiterError):
    """A point or line lies outside the region where a function is defined."""


class GridMismatchError(WhiterError):
    pass


class SingularityError(WhiterError):
    """A symbol (nearly) vanishes where it must not."""


class ClassViolationError(WhiterError):
    """Input does not decay like a member of the working function class."""


class WindingError(ClassViolationError):
    """Accumulated argument is not close to an integer multiple of 2*pi."""


class NonzeroIndexError(ClassViolationError):
    """Nonzero index: no factorisation exists in the working class."""


class EvaluationRegionError(DomainError):
    pass


class DivergenceError(WhiterError):
    pass


class ConfigError(WhiterError):
    pass


class ExpressionError(ConfigError):
    def __init__(self, message, source=None, position=None):
        self.source = source
        self.position = position
        if source is not None and position is not None:
            message = f"{message} at column {position + 1}\n  {source}\n  {' ' * position}^"
        super().__init__(message)
