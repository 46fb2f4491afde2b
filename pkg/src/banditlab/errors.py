"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures without a
lookup table: 2 for bad input, 3 for numerical failure, 4 for a violated
structural precondition (regularity of the discount sequence and friends).
"""


class BanditLabError(Exception):
    exit_code = 3


# -- invalid input (exit 2) --------------------------------------------------

class InvalidInput(BanditLabError):
    exit_code = 2


class NegativeWeight(InvalidInput):
    pass


class ZeroMass(InvalidInput):
    pass


class ImproperPrior(InvalidInput):
    pass


class ObservationOutOfSupport(InvalidInput):
    pass


class NonPositiveScale(InvalidInput):
    pass


class UnsupportedFamily(InvalidInput):
    pass


class OneArmedUnsupported(InvalidInput):
    pass


class HistoryLongerThanHorizon(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class SupportMismatch(InvalidInput):
    pass


class NonUniformGrid(InvalidInput):
    pass


class UnequalMeans(InvalidInput):
    pass


class DegenerateMean(InvalidInput):
    pass


class DegeneratePrior(InvalidInput):
    pass


class OrderViolation(InvalidInput):
    pass


class BoundarySupport(InvalidInput):
    pass


class GridOutOfRange(InvalidInput):
    pass


class ObservationOutsideSafeRange(InvalidInput):
    pass


class MeanMismatch(InvalidInput):
    pass


class SlopeBoundViolated(InvalidInput):
    pass


class UnknownSuite(InvalidInput):
    pass


class SchemaError(InvalidInput):
    pass


# -- numerical failure (exit 3) ----------------------------------------------

class NumericalFailure(BanditLabError):
    exit_code = 3


class HorizonTooLarge(NumericalFailure):
    pass


class BudgetExceeded(NumericalFailure):
    pass


class BracketFailure(NumericalFailure):
    pass


class RootNotBracketed(NumericalFailure):
    pass


# -- structural preconditions (exit 4) ---------------------------------------

class PreconditionFailure(BanditLabError):
    exit_code = 4


class NotRegular(PreconditionFailure):
    pass


class ZeroFirstWeight(PreconditionFailure):
    pass


class InsufficientHorizon(PreconditionFailure):
    pass
