"""Sampling grid, curve container, and norms on the grid.

A curve is a function observed on a fixed periodic grid of ``tau`` points
(one seasonal cycle, e.g. 24 hourly values).  Integrals are rectangle-rule
sums weighted by the grid spacing, which is how all downstream metrics are
defined.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError, GridMismatchError, ParameterError


class NormTag(enum.Enum):
    """Norms available on the sampling grid."""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


@dataclass(frozen=True)
class Grid:
    """Fixed periodic sampling grid: ``tau`` points per cycle, ``spacing`` apart.

    All curves in one analysis must share one grid.
    """

    tau: int
    spacing: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.tau, int) or self.tau < 2:
            raise ParameterError(f"grid needs an integer tau >= 2, got {self.tau!r}")
        if not self.spacing > 0:
            raise ParameterError(f"grid spacing must be positive, got {self.spacing!r}")


@dataclass(frozen=True)
class Curve:
    """A real-valued function sampled on one seasonal cycle.

    ``values`` is stored as an immutable float64 vector of length ``grid.tau``.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.tau,):
            raise ParameterError(
                f"curve has {v.shape} values, expected ({self.grid.tau},)"
            )
        if not np.all(np.isfinite(v)):
            raise DataError("curve contains non-finite values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Curve":
        """New curve on the same grid."""
        return Curve(self.grid, values)


def require_same_grid(x: Curve, y: Curve) -> None:
    if x.grid != y.grid:
        raise GridMismatchError(f"incompatible grids: {x.grid} vs {y.grid}")


def norm_values(values: np.ndarray, spacing: float, p: NormTag) -> float:
    """Rectangle-rule norm of a raw value vector."""
    if p is NormTag.L1:
        return float(spacing * np.sum(np.abs(values)))
    if p is NormTag.L2:
        return float(np.sqrt(spacing * np.sum(values * values)))
    if p is NormTag.LINF:
        return float(np.max(np.abs(values)))
    raise ParameterError(f"unknown norm tag {p!r}")


def norm_lp(x: Curve, p: NormTag) -> float:
    """Norm of a curve under the chosen tag.

    L1 and L2 are rectangle-rule quadratures (weighted by the grid spacing);
    Linf is the plain maximum of absolute values.
    """
    return norm_values(x.values, x.grid.spacing, p)


def l1_distance(x: Curve, y: Curve) -> float:
    """Rectangle-rule L1 distance between two curves on the same grid."""
    require_same_grid(x, y)
    return norm_values(x.values - y.values, x.grid.spacing, NormTag.L1)
