"""Exception hierarchy shared across the package.

Three buckets map onto CLI exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class VcgstError(Exception):
    """Base class for all package errors."""


class ConfigError(VcgstError):
    """Invalid or inconsistent run configuration."""


class DataError(VcgstError):
    """Malformed, inconsistent, or insufficient input data."""


class NumericError(VcgstError):
    """Numerical failure inside tensor or training code."""


# -- data errors -------------------------------------------------------------

class MalformedRecord(DataError):
    """An ingestion row violates the documented schema."""


class BipartiteViolation(DataError):
    """An edge connects two nodes of the same kind."""


class OutOfOrderIncrement(DataError):
    """Increment period is not exactly max period + 1."""


class DanglingEdge(DataError):
    """Edge endpoint absent from the cumulative node set."""


class InsufficientNonEdges(DataError):
    """Graph too dense or small to sample the requested negatives."""


class MissingFirstFunding(DataError):
    """Start-up record lacks a first funding date."""


class UnknownStartup(DataError):
    """Start-up id not present in the requested embedding table."""


class EmptySplit(DataError):
    """A data split came out empty for the given ranges."""


class EmptyTrainingSet(DataError):
    """No uncensored training samples available."""


class NoEvaluableMonths(DataError):
    """No month in the window has ranked candidates."""


class NoSecondRounds(DataError):
    """No test start-up received a second funding round."""


class InfeasibleConfig(ConfigError):
    """Generator configuration cannot be satisfied."""


# -- numeric errors ----------------------------------------------------------

class ShapeMismatch(NumericError):
    """Operands have incompatible shapes."""


class DimensionMismatch(NumericError):
    """A vector or parameter has the wrong dimensionality."""


class NonFiniteValue(NumericError):
    """An operation produced NaN or Inf."""


class NonFiniteGradient(NumericError):
    """Backward pass produced NaN or Inf gradients."""


class MissingEmbedding(NumericError):
    """A node referenced by a decoder has no embedding row."""
