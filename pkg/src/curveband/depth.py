"""Random Tukey depth for sets of curves.

The depth of a curve within a set is the minimum, over a few random
one-dimensional projections, of the univariate Tukey (halfspace) depth of
its projected value: min(#{p <= v}, #{p >= v}) / n, both tails inclusive so
duplicated values share depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .curves import Curve, Grid, require_same_grid
from .errors import ParameterError


@dataclass(frozen=True)
class DepthConfig:
    """Number of random projection directions and the seed generating them."""

    n_projections: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n_projections, int) or self.n_projections < 1:
            raise ParameterError(
                f"n_projections must be a positive integer, got {self.n_projections!r}"
            )


def projection_directions(grid: Grid, config: DepthConfig) -> np.ndarray:
    """Random directions: standard normal coordinates on the grid, each
    normalized under the spacing-weighted L2 norm."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    dirs = rng.standard_normal((config.n_projections, grid.tau))
    norms = np.sqrt(grid.spacing * np.sum(dirs * dirs, axis=1))
    return dirs / norms[:, None]


def random_tukey_depth_values(
    values: np.ndarray, grid: Grid, config: DepthConfig
) -> np.ndarray:
    """Depths of the rows of a (n, tau) value matrix within that set."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != grid.tau:
        raise ParameterError(f"expected (n, {grid.tau}) value matrix")
    if values.shape[0] == 0:
        raise ParameterError("need at least one curve")
    dirs = projection_directions(grid, config)
    # grid inner product of every curve with every direction
    proj = grid.spacing * (dirs @ values.T)  # (n_projections, n)
    return _kernels.tukey_depths(proj)


def random_tukey_depth(curves: Sequence[Curve], config: DepthConfig) -> np.ndarray:
    """Depths of each curve within the given set, in [1/n, 1].

    Deterministic given the seed; adding projections can only lower or keep
    each depth (minimum over a superset of directions).
    """
    if len(curves) == 0:
        raise ParameterError("need at least one curve")
    grid = curves[0].grid
    for c in curves[1:]:
        require_same_grid(curves[0], c)
    return random_tukey_depth_values(
        np.stack([c.values for c in curves]), grid, config
    )
