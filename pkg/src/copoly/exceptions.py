"""Exception hierarchy shared by all copoly modules."""


class CopolyError(Exception):
    """Base class for every error raised by copoly."""


class RateError(CopolyError, ValueError):
    """Invalid attachment/detachment rate input."""


class DimensionMismatch(RateError):
    pass


class NonPositiveRate(RateError):
    pass


class EmptyRates(RateError):
    pass


class IdOutOfRange(CopolyError, IndexError):
    pass


class DimensionError(CopolyError, ValueError):
    pass


class RegimeError(CopolyError):
    """Operation requires a regime the rate set is not in."""


class NoConvergence(CopolyError, ArithmeticError):
    pass


class DivisionDegenerate(CopolyError, ArithmeticError):
    pass


class OutOfRange(CopolyError, ValueError):
    pass


class DegenerateWindow(CopolyError, ValueError):
    pass


class EmptyTrajectory(CopolyError, ValueError):
    pass


class InsufficientData(CopolyError, ValueError):
    pass


class BoundaryError(CopolyError, AssertionError):
    """The extracted boundary process violates its structural invariants."""
