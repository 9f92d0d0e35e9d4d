"""Exception and warning types raised across the package."""


class MvdfqError(ValueError):
    """Base class for all errors raised by mvdfq."""


# quantization
class EmptyDataset(MvdfqError):
    pass


class ConstantDimension(MvdfqError):
    pass


class TooFewDistinctValues(MvdfqError):
    pass


class TooFewSamples(MvdfqError):
    pass


class DimensionMismatch(MvdfqError):
    pass


# kernels
class SymbolOutOfRange(MvdfqError):
    pass


class InvalidParams(MvdfqError):
    pass


class NegativeWeight(MvdfqError):
    pass


class AlphabetMismatch(MvdfqError):
    pass


# gram / files
class NonFinite(MvdfqError):
    pass


class FormatError(MvdfqError):
    """A serialized file is malformed."""


# learning
class SingleClass(MvdfqError):
    pass


class LengthMismatch(MvdfqError):
    pass


class EmptyInput(MvdfqError):
    pass


class TooFewPerClass(MvdfqError):
    pass


class UnknownGroupKey(MvdfqError):
    pass


# ingestion
class IngestError(MvdfqError):
    pass


class NonNumericCell(IngestError):
    pass


class InconsistentColumns(IngestError):
    pass


class NaNOrInf(IngestError):
    pass


class DuplicateId(IngestError):
    pass


class UnknownResidue(IngestError):
    pass


class MissingLabel(IngestError):
    pass


class NonPsdWarning(UserWarning):
    """Gram matrix has a markedly negative eigenvalue."""


class ConvergenceWarning(UserWarning):
    pass
