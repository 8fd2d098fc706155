"""Proximity measures between curves for kernel weights.

Two kinds are supported: the raw L2 distance on the grid, and a seminorm of
the difference curve projected on the leading principal-component directions
of a training sample (suited to rough curves, where raw distances are noisy).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import Curve, Grid, require_same_grid
from .errors import DataError, ParameterError

L2_RAW = "l2_raw"
FPCA = "fpca"


@dataclass(frozen=True)
class SemimetricModel:
    """A fitted proximity measure d(.,.) between curves on one grid.

    For the ``fpca`` kind, ``basis`` holds q direction curves, orthonormal
    under the spacing-weighted inner product, and ``eigenvalues`` the full
    spectrum of the sample covariance (descending).  ``degenerate`` flags a
    fit on a zero-variance sample.
    """

    kind: str
    grid: Grid
    q: int
    basis: np.ndarray | None = None
    mean: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (L2_RAW, FPCA):
            raise ParameterError(f"unknown semimetric kind {self.kind!r}")
        if self.kind == FPCA:
            if self.basis is None or self.basis.shape != (self.q, self.grid.tau):
                raise ParameterError("fpca semimetric requires a (q, tau) basis")

    @property
    def explained_fraction(self) -> float:
        """Share of total sample variance carried by the q retained directions."""
        if self.kind != FPCA or self.eigenvalues is None:
            return 1.0
        total = float(self.eigenvalues.sum())
        if total <= 0.0:
            return 1.0
        return float(self.eigenvalues[: self.q].sum() / total)


def l2_semimetric(grid: Grid) -> SemimetricModel:
    """Raw spacing-weighted L2 distance between curves."""
    return SemimetricModel(kind=L2_RAW, grid=grid, q=grid.tau)


def fit_semimetric_from_values(
    values: np.ndarray, grid: Grid, q: int, kind: str = FPCA
) -> SemimetricModel:
    """Fit a semimetric on a (n, tau) matrix of sample curves."""
    if kind == L2_RAW:
        return l2_semimetric(grid)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != grid.tau:
        raise ParameterError(f"expected (n, {grid.tau}) sample matrix")
    n = values.shape[0]
    if not isinstance(q, int) or q < 1:
        raise ParameterError(f"q must be a positive integer, got {q!r}")
    if q > grid.tau:
        raise ParameterError(f"q={q} exceeds grid size tau={grid.tau}")
    if q > n:
        raise ParameterError(f"q={q} exceeds sample size {n}")
    if not np.all(np.isfinite(values)):
        raise DataError("sample contains non-finite values")

    mean = values.mean(axis=0)
    centered = values - mean
    cov = centered.T @ centered / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]

    basis = np.empty((q, grid.tau))
    for i in range(q):
        v = eigvecs[:, i]
        # deterministic sign: largest-magnitude coordinate made positive
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        # rescale so rows are orthonormal under the spacing-weighted product
        basis[i] = v / np.sqrt(grid.spacing)

    return SemimetricModel(
        kind=FPCA,
        grid=grid,
        q=q,
        basis=basis,
        mean=mean,
        eigenvalues=eigvals,
        degenerate=bool(eigvals.sum() <= 1e-300),
    )


def fpca_semimetric_fit(sample: Sequence[Curve], q: int) -> SemimetricModel:
    """Fit the principal-component seminorm on a sample of curves.

    The sample is centered by its mean curve; the q leading eigenvectors of
    the empirical covariance on the grid (descending eigenvalue order, sign
    fixed so the largest-magnitude coordinate is positive) define the
    projection directions.
    """
    if len(sample) == 0:
        raise ParameterError("cannot fit a semimetric on an empty sample")
    grid = sample[0].grid
    for c in sample[1:]:
        require_same_grid(sample[0], c)
    values = np.stack([c.values for c in sample])
    return fit_semimetric_from_values(values, grid, q, kind=FPCA)


def semimetric_features(model: SemimetricModel, values: np.ndarray) -> np.ndarray:
    """Map curve value rows to feature rows whose euclidean distance is d(.,.).

    For the raw L2 kind the features are the values scaled by sqrt(spacing);
    for the fpca kind they are the spacing-weighted projection scores on the
    retained directions.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[1] != model.grid.tau:
        raise ParameterError(f"expected rows of length {model.grid.tau}")
    if model.kind == L2_RAW:
        return values * np.sqrt(model.grid.spacing)
    return model.grid.spacing * (values @ model.basis.T)


def semimetric_eval(model: SemimetricModel, x: Curve, y: Curve) -> float:
    """Distance between two curves under the fitted semimetric."""
    require_same_grid(x, y)
    if x.grid != model.grid:
        raise ParameterError(f"curves on {x.grid} but model fitted on {model.grid}")
    f = semimetric_features(model, np.stack([x.values, y.values]))
    return float(np.sqrt(np.sum((f[0] - f[1]) ** 2)))
