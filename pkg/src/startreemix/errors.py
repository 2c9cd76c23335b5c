"""Exception hierarchy shared by every module."""


class StarTreeMixError(ValueError):
    """Base class for all input and domain errors raised by the package."""


class NegativeEntry(StarTreeMixError):
    pass


class LengthMismatch(StarTreeMixError):
    pass


class TooFewTaxa(StarTreeMixError):
    pass


class SizeMismatch(StarTreeMixError):
    pass


class BadIndices(StarTreeMixError):
    pass


class NotTreeMetric(StarTreeMixError):
    pass


class WrongSplit(StarTreeMixError):
    pass


class NotAPartition(StarTreeMixError):
    pass


class InvalidTree(StarTreeMixError):
    pass


class NotInImage(StarTreeMixError):
    pass


class StarInput(StarTreeMixError):
    pass


class OutOfDomain(StarTreeMixError):
    pass


class PostconditionViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, never bad input."""


class BudgetExceeded(StarTreeMixError):
    pass
