"""Exception types shared across the package.

Every domain error carries a short machine-greppable ``code`` that the CLI
prints as ``error[Code]: message`` on stderr.
"""


class BenthicaError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "Error"


# ---------------------------------------------------------------------------
# label tree

class TreeFormatError(BenthicaError):
    code = "TreeFormat"


class IndentJumpError(TreeFormatError):
    """Indentation is malformed or skips a level."""

    code = "IndentJump"


class MultipleRootsError(TreeFormatError):
    code = "MultipleRoots"


class DuplicateLeafNameError(TreeFormatError):
    code = "DuplicateLeafName"


class DuplicateSiblingNameError(TreeFormatError):
    code = "DuplicateSiblingName"


class EmptyNameError(TreeFormatError):
    code = "EmptyName"


class UnknownNodeError(BenthicaError):
    code = "UnknownNode"


class NotALeafError(BenthicaError):
    code = "NotALeaf"


# ---------------------------------------------------------------------------
# datasets and annotations

class UnknownLabelError(BenthicaError):
    code = "UnknownLabel"


class MalformedRowError(BenthicaError):
    code = "MalformedRow"


class DimensionMismatchError(BenthicaError):
    code = "DimensionMismatch"


class RequestTooLargeError(BenthicaError):
    code = "RequestTooLarge"


class DuplicatePointError(BenthicaError):
    code = "DuplicatePoint"


# ---------------------------------------------------------------------------
# network training

class InvalidDimensionError(BenthicaError):
    code = "InvalidDimension"


class LabelOutOfRangeError(BenthicaError):
    code = "LabelOutOfRange"


class NumericalError(BenthicaError):
    """A parameter became NaN or Inf during training."""

    code = "Numerical"


# ---------------------------------------------------------------------------
# models

class LabelNotInTreeError(BenthicaError):
    code = "LabelNotInTree"


class EmptyTrainingSetError(BenthicaError):
    code = "EmptyTrainingSet"


class NoTrainedPathError(BenthicaError):
    code = "NoTrainedPath"


# ---------------------------------------------------------------------------
# evaluation

class LengthMismatchError(BenthicaError):
    code = "LengthMismatch"


class EmptyAnnotationSetError(BenthicaError):
    code = "EmptyAnnotationSet"


class KeyMismatchError(BenthicaError):
    code = "KeyMismatch"


class DatasetOverlapError(BenthicaError):
    code = "DatasetOverlap"
