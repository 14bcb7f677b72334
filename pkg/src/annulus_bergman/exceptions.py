"""Exception hierarchy for the package."""


class AnnulusError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AnnulusError, ValueError):
    """A point or parameter lies outside the domain an operation accepts."""


class TruncationError(AnnulusError, ArithmeticError):
    """The series tail could not be pushed under the requested tolerance.

    ``achievable`` holds the tail bound reached at ``max_terms``.
    """

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class InvalidJetError(AnnulusError, ValueError):
    pass


class NumericalConsistencyError(AnnulusError, ArithmeticError):
    """Two independent evaluation routes disagree beyond tolerance."""

    def __init__(self, message, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second


class DegenerateConstraintError(AnnulusError, ArithmeticError):
    pass


class ExtractionUnstableError(AnnulusError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PrecisionExhaustedError(AnnulusError, ArithmeticError):
    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class ChainValidationError(AnnulusError, ValueError):
    """A chain specification violates one of the conditions (i), (ii), (iii).

    ``condition`` is the roman numeral, ``index`` the 1-based offending index
    (``None`` when the violation concerns the generating rule as a whole).
    """

    def __init__(self, condition, index, message):
        where = "" if index is None else f" at index {index}"
        super().__init__(f"condition ({condition}) violated{where}: {message}")
        self.condition = condition
        self.index = index


class GeometryInconsistencyError(AnnulusError, ArithmeticError):
    pass


class SingularPointError(AnnulusError, ValueError):
    pass


class BranchError(AnnulusError, ArithmeticError):
    pass
