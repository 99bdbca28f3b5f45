"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` used by the command-line front end.
"""


class LiouvmatError(Exception):
    exit_code = 2


class DivergentSeries(LiouvmatError):
    """Exponent schedule is not strictly increasing."""


class DomainError(LiouvmatError):
    """Even root of a provably negative value."""


class DivisionByZeroEnclosure(LiouvmatError):
    """Denominator enclosure keeps containing 0 up to the precision cap."""

    exit_code = 4


class OverflowPolicyError(LiouvmatError):
    """Exact value would exceed the configured bit budget."""

    exit_code = 3


class ScheduleTooShort(LiouvmatError):
    """A finite cut/exponent schedule was asked for more terms than it has."""


class DimensionMismatch(LiouvmatError):
    pass


class SingularMatrix(LiouvmatError):
    pass


class NonInvertible(SingularMatrix):
    pass


NonInvertibleDenominator = NonInvertible


class PrecisionCap(LiouvmatError):
    exit_code = 4

    def __init__(self, message, candidates=None):
        super().__init__(message)
        self.candidates = candidates or []


class BudgetExceeded(LiouvmatError):
    exit_code = 3


class OutsideRadius(LiouvmatError):
    pass


class TailBoundFailure(LiouvmatError):
    pass


class DegeneratePair(LiouvmatError):
    pass


class NotPolynomial(LiouvmatError):
    pass


class ParseError(LiouvmatError):
    pass


class PropertyCheckFailed(LiouvmatError):
    exit_code = 5
