"""Exception types raised across the package."""


class InvSizerError(Exception):
    """Base class for all package errors."""


class NonPhysical(InvSizerError):
    """A surrogate intermediate left its valid domain (device off, no headroom, ...)."""


class EmptyDataset(InvSizerError):
    pass


class DatasetTooSmall(InvSizerError):
    pass


class SchemaMismatch(InvSizerError):
    pass


class ParseError(InvSizerError):
    pass


class ShapeMismatch(InvSizerError, ValueError):
    pass


class DimensionMismatch(InvSizerError, ValueError):
    pass


class EmptyTrainingSet(InvSizerError):
    pass


class NonFiniteLoss(InvSizerError):
    """Training diverged: the mini-batch loss became NaN or infinite."""


class ConvergenceFailure(InvSizerError):
    pass


class EmptyRecords(InvSizerError):
    pass
