"""Exception hierarchy.

Two families matter for the CLI exit-code contract: ``DataError`` (bad or
insufficient input data, exit code 2) and ``ModelError`` (numeric or model
problems, exit code 3).
"""


class QmyoError(Exception):
    """Base class for all package errors."""


class DataError(QmyoError):
    """Input data is malformed, empty, or insufficient."""


class ModelError(QmyoError):
    """A numeric or model-level operation cannot proceed."""


class EmptyInputError(DataError):
    """A recording or dataset is too short to process."""


class InsufficientSamplesError(DataError):
    """A window has fewer samples than the feature requires."""


class DatasetParseError(DataError):
    """A dataset row could not be parsed; the message names the line."""


class DatasetSchemaError(DataError):
    """A dataset violates the expected column layout or row semantics."""


class MalformedBlockError(DataError):
    """A trajectory block is empty or blocks do not partition the samples."""


class ConfigurationError(DataError):
    """An experiment configuration is inconsistent with the available data."""


class InsufficientTrainingError(DataError):
    """Training data is missing a required degree of freedom or direction."""


class ZeroSignalError(ModelError):
    """An all-zero feature vector cannot be encoded as a unit state."""


class DimensionError(ModelError):
    """Vector or matrix dimensions do not match."""


class DegeneratePrototypeError(ModelError):
    """The weighted prototype superposition cancelled to (near) zero."""


class DegenerateOperatorsError(ModelError):
    """Direction prototypes are nearly identical; the pair is undecodable."""


class UndefinedDenominatorError(ModelError):
    """A performance index denominator is zero (constant truth trajectory)."""
