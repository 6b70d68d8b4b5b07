"""Exception types raised across the pipeline."""


class EdgeGridError(Exception):
    """Base class for pipeline errors."""


class FormatError(EdgeGridError, ValueError):
    """Unsupported or malformed input file or label."""


class DimensionError(EdgeGridError, ValueError):
    """Array or raster shapes that do not fit together."""


class DegenerateDataError(EdgeGridError, ValueError):
    """Data that cannot support the requested computation (e.g. a single class)."""


class PartitionError(EdgeGridError, ValueError):
    """Too few groups to build the requested split or folds."""


class NumericError(EdgeGridError, ArithmeticError):
    """Non-finite values where finite numbers are required."""
