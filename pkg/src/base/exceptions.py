"""
Exception hierarchy shared by the library and the command line front end.

Every exception derives from :class:`SymplecticError` and from the builtin
that best describes it, so callers can catch either.
"""

from typing import Optional


class SymplecticError(Exception):
    """Root of all errors raised by this package."""


class ConfigurationError(SymplecticError, ValueError):
    """Configuration file or environment value is unusable."""


class ShapeMismatchError(SymplecticError, ValueError):
    """Matrix or sequence shapes do not agree."""


class IndexOutOfRangeError(SymplecticError, IndexError):
    """An index lies outside the discrete interval (or the truncation)."""


class InvalidSystemError(SymplecticError, ValueError):
    """Coefficient data violate a constructor requirement.

    Attributes:
        identity: Name of the violated identity or requirement
        index: Offending index, when there is one
    """

    def __init__(self, message: str, identity: str = "", index: Optional[int] = None):
        super().__init__(message)
        self.identity = identity
        self.index = index


class PreconditionError(SymplecticError, ValueError):
    """Input does not satisfy the precondition of an operation."""


class AtkinsonFailureError(SymplecticError, ArithmeticError):
    """The solution Gram matrix is numerically singular.

    Attributes:
        condition_number: Condition number that tripped the threshold
    """

    def __init__(self, message: str, condition_number: float = float("inf")):
        super().__init__(message)
        self.condition_number = condition_number


class DegenerateRelationError(SymplecticError, ArithmeticError):
    """The characteristic determinant vanishes identically."""


class ConvergenceError(SymplecticError, ArithmeticError):
    """An endpoint limit cannot be trusted at the given truncation."""


class SpecFileError(SymplecticError, ValueError):
    """A system spec file could not be parsed.

    Attributes:
        field: Dotted path of the offending field ("" for syntax errors)
        line: Line number for syntax errors
        column: Column number for syntax errors
    """

    def __init__(
        self,
        message: str,
        field: str = "",
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        location = f" at line {line}, column {column}" if line is not None else ""
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}{location}")
        self.field = field
        self.line = line
        self.column = column
