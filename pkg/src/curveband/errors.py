"""Exception types shared across the package.

The CLI maps these onto exit codes: data problems -> 2, configuration
problems -> 3, numerical failures -> 4.
"""


class CurvebandError(Exception):
    """Base class for all library errors."""


class ParameterError(CurvebandError):
    """Invalid parameter or configuration value."""


class DataError(CurvebandError):
    """Malformed, gapped, or non-finite input data."""


class GridMismatchError(DataError):
    """Curves defined on incompatible sampling grids."""


class InsufficientHistoryError(DataError):
    """Not enough past days to build a training window."""


class DegenerateBandwidthError(CurvebandError):
    """k-nearest-neighbour bandwidth collapsed to zero."""


class EmptyNeighborhoodError(CurvebandError):
    """No training curve received positive kernel weight."""


class SingularDesignError(CurvebandError):
    """Covariate design is singular or too ill-conditioned to solve."""


class NonConvergenceError(CurvebandError):
    """Iterative routine failed to converge within its cap."""


class UnsupportedRegionError(ParameterError):
    """Operation requested on a region representation that cannot support it."""


NUMERICAL_ERRORS = (
    DegenerateBandwidthError,
    EmptyNeighborhoodError,
    SingularDesignError,
    NonConvergenceError,
)
