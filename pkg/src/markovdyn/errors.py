"""Exception types shared by all modules."""


class MarkovDynError(Exception):
    """Base class for every error raised by this package."""


class NotLoxodromic(MarkovDynError):
    pass


class PrecisionExhausted(MarkovDynError):
    pass


class SingularPoint(MarkovDynError):
    pass


class NotFixed(MarkovDynError):
    pass


class NotRational(MarkovDynError):
    pass


class DegenerateMatrix(MarkovDynError):
    pass


class NotAdjacent(MarkovDynError):
    pass


class NotAdapted(MarkovDynError):
    pass


class BudgetExceeded(MarkovDynError):
    pass


class EigenvalueMismatch(MarkovDynError):
    pass
