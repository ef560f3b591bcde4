"""Exception types raised across the package."""


class VecOptError(Exception):
    """Base class for all package errors."""


class NonFinite(VecOptError, ValueError):
    pass


class NotPointed(VecOptError, ValueError):
    pass


class EmptyInterior(VecOptError, ValueError):
    pass


class InvalidAngle(VecOptError, ValueError):
    pass


class TooFewFacets(VecOptError, ValueError):
    pass


class DimensionMismatch(VecOptError, ValueError):
    pass


class EmptyInput(VecOptError, ValueError):
    pass


class IndexOutOfRange(VecOptError, IndexError):
    pass


class InsufficientData(VecOptError, ValueError):
    pass


class ModelError(VecOptError, RuntimeError):
    pass


class BudgetTooSmall(VecOptError, ValueError):
    pass


class CostVectorInvalid(VecOptError, ValueError):
    pass


class SolverDidNotConverge(VecOptError, RuntimeError):
    """Iterative solver hit its iteration cap.

    ``lower``/``upper`` bracket the quantity being minimized and ``decided``
    tells whether the bracket already settles the caller's predicate.
    """

    def __init__(self, message, lower=None, upper=None, decided=False):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.decided = decided


class MalformedRow(VecOptError, ValueError):
    def __init__(self, index, reason=""):
        super().__init__(f"malformed row {index}" + (f": {reason}" if reason else ""))
        self.index = index


class NonNumericColumn(VecOptError, ValueError):
    def __init__(self, name):
        super().__init__(f"column {name!r} is not numeric")
        self.name = name


class ConfigInvalid(VecOptError, ValueError):
    pass


class SchemaMismatch(VecOptError, ValueError):
    pass
