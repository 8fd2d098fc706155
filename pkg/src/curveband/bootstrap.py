"""Residual resampling and the three prediction-region constructors.

The resampling scheme fits the model with an oversmoothed bandwidth, centers
the residual curves, and rebuilds pseudo-responses by drawing residuals with
replacement.  Because both estimator families reduce to fixed linear
functionals of the response matrix once their bandwidths are set (see
``regression.LinearPredictor``), each bootstrap refit is a single weighted
sum.

Three region constructors share one set of replicates:

* ball of bootstrap-quantile radius around the point prediction, in a
  chosen curve norm;
* band of half-width lambda * sigma(t), where sigma is the pointwise
  bootstrap standard deviation of the predictor and lambda is found by
  bisecting the Monte Carlo simultaneous-coverage function;
* envelope of the deepest bootstrap future observations under random
  Tukey depth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .curves import Curve, Grid, NormTag, norm_values
from .depth import DepthConfig, random_tukey_depth_values
from .errors import NonConvergenceError, ParameterError, UnsupportedRegionError
from .regression import LinearPredictor, ModelSpec, RegressionSample, compile_predictor


class DegenerateRegionWarning(UserWarning):
    """A constructed region has zero radius or width."""


# ---------------------------------------------------------------------------
# region containers


@dataclass(frozen=True)
class BallRegion:
    """All curves within ``radius`` of ``center`` under the tagged norm."""

    center: Curve
    radius: float
    norm: NormTag

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ParameterError(f"radius must be nonnegative, got {self.radius!r}")
        if self.radius == 0:
            warnings.warn(
                "prediction region has zero radius", DegenerateRegionWarning,
                stacklevel=2,
            )

    def to_band(self) -> "BandRegion":
        """Equivalent band representation; only the sup-norm ball has one."""
        if self.norm is not NormTag.LINF:
            raise UnsupportedRegionError(
                f"{self.norm.value} ball has no band representation"
            )
        c = self.center.values
        return BandRegion(
            lower=Curve(self.center.grid, c - self.radius),
            upper=Curve(self.center.grid, c + self.radius),
            center=self.center,
        )


@dataclass(frozen=True)
class BandRegion:
    """All curves between ``lower`` and ``upper`` pointwise."""

    lower: Curve
    upper: Curve
    center: Curve

    def __post_init__(self) -> None:
        if not (self.lower.grid == self.upper.grid == self.center.grid):
            raise ParameterError("band curves must share one grid")
        if np.any(self.lower.values > self.upper.values):
            raise ParameterError("band lower limit exceeds upper limit somewhere")

    @property
    def widths(self) -> np.ndarray:
        return self.upper.values - self.lower.values


PredictionRegion = BallRegion | BandRegion


# ---------------------------------------------------------------------------
# residual machinery


@dataclass(frozen=True)
class ResidualSet:
    """Centered residual curves under the oversmoothed fit."""

    residuals: np.ndarray  # (n, tau), columns sum to ~0
    mean_removed: Curve

    @property
    def n(self) -> int:
        return self.residuals.shape[0]


def center_residual_matrix(errors: np.ndarray, grid: Grid) -> ResidualSet:
    """Subtract the mean residual curve from every residual row."""
    errors = np.asarray(errors, dtype=np.float64)
    mean = errors.mean(axis=0)
    return ResidualSet(residuals=errors - mean, mean_removed=Curve(grid, mean))


def center_residuals(sample: RegressionSample, spec: ModelSpec) -> ResidualSet:
    """Residuals of the oversmoothed in-sample fit, centered to zero mean."""
    predictor = compile_predictor(sample, spec, k=spec.k_boot(sample.n))
    errors = sample.responses - predictor.fitted()
    return center_residual_matrix(errors, sample.grid)


def bootstrap_resample(
    resid: ResidualSet,
    sample: RegressionSample,
    spec: ModelSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pseudo-responses: oversmoothed fitted values plus resampled residuals.

    Predictors are left untouched; residuals are drawn uniformly with
    replacement from the centered set.
    """
    predictor = compile_predictor(sample, spec, k=spec.k_boot(sample.n))
    idx = rng.integers(0, resid.n, size=sample.n)
    return predictor.fitted() + resid.residuals[idx]


# ---------------------------------------------------------------------------
# replicate generation


@dataclass(frozen=True)
class BootstrapRun:
    """Replicate-level ingredients shared by all three region constructors.

    ``boot_predictors[j]`` is the refit prediction at the query from the
    j-th pseudo-sample; ``boot_errors[j]`` the j-th resampled future
    residual.  ``base_prediction_h`` / ``base_prediction_b`` are the point
    predictions at the working and oversmoothed bandwidths.
    """

    grid: Grid
    n_boot: int
    seed: int
    boot_predictors: np.ndarray  # (B, tau)
    boot_errors: np.ndarray  # (B, tau)
    base_prediction_h: Curve
    base_prediction_b: Curve

    def __post_init__(self) -> None:
        shape = (self.n_boot, self.grid.tau)
        if self.boot_predictors.shape != shape or self.boot_errors.shape != shape:
            raise ParameterError(f"replicate matrices must have shape {shape}")

    def error_matrix(self) -> np.ndarray:
        """Bootstrap analogue of the prediction error, one row per replicate:
        oversmoothed base prediction minus refit prediction plus future
        residual."""
        return (
            self.base_prediction_b.values[None, :]
            - self.boot_predictors
            + self.boot_errors
        )

    def future_observations(self) -> np.ndarray:
        """Replicate future curves used by the depth envelope: refit
        prediction plus future residual."""
        return self.boot_predictors + self.boot_errors


def build_bootstrap_run(
    sample: RegressionSample,
    spec: ModelSpec,
    query_curve: Curve,
    query_x: np.ndarray | None = None,
    n_boot: int = 500,
    seed: int = 0,
) -> BootstrapRun:
    """Generate the replicate matrices for one query.

    Bandwidths are selected once on the original sample and held fixed
    across replicates; the refit prediction for each pseudo-sample is then a
    weighted sum of its pseudo-responses.  All draws come from one generator
    seeded by ``seed`` (index matrix first, future residual picks second),
    so repeated calls are bitwise identical.
    """
    if not isinstance(n_boot, int) or n_boot < 1:
        raise ParameterError(f"n_boot must be a positive integer, got {n_boot!r}")
    pred_h = compile_predictor(sample, spec, k=min(spec.k, sample.n))
    pred_b = compile_predictor(sample, spec, k=spec.k_boot(sample.n))

    fitted_b = pred_b.fitted()
    resid = center_residual_matrix(sample.responses - fitted_b, sample.grid)

    a_h = pred_h.query_weights(query_curve, query_x)
    a_b = pred_b.query_weights(query_curve, query_x)
    base_h = a_h @ sample.responses
    base_b = a_b @ sample.responses

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    idx = rng.integers(0, sample.n, size=(n_boot, sample.n))
    future_idx = rng.integers(0, sample.n, size=n_boot)

    base_star = a_h @ fitted_b
    boot_predictors = base_star + _kernels.resample_weighted_sums(
        a_h, resid.residuals, idx
    )
    boot_errors = resid.residuals[future_idx]

    return BootstrapRun(
        grid=sample.grid,
        n_boot=n_boot,
        seed=seed,
        boot_predictors=boot_predictors,
        boot_errors=boot_errors,
        base_prediction_h=Curve(sample.grid, base_h),
        base_prediction_b=Curve(sample.grid, base_b),
    )


# ---------------------------------------------------------------------------
# region constructors


def _floor_count(n: int, alpha: float) -> int:
    """floor(n*(1-alpha)), with the product rounded at the 9th decimal first
    so that decimal alphas (0.05, 0.2, ...) hit the mathematically intended
    count despite binary float representation."""
    return int(math.floor(round(n * (1.0 - alpha), 9)))


def order_statistic_index(n: int, alpha: float) -> int:
    """1-based quantile index floor(n*(1-alpha)), clamped to [1, n]."""
    return min(max(_floor_count(n, alpha), 1), n)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


def lp_region(run: BootstrapRun, alpha: float, norm: NormTag) -> BallRegion:
    """Ball around the point prediction with bootstrap-quantile radius.

    The radius is the floor(B*(1-alpha))-th smallest norm of the replicate
    errors.  For the sup norm the ball doubles as a constant-width band via
    ``BallRegion.to_band``.
    """
    _check_alpha(alpha)
    if run.n_boot < 1.0 / alpha:
        warnings.warn(
            f"B={run.n_boot} replicates is small for alpha={alpha}; the "
            "radius quantile is coarse",
            stacklevel=2,
        )
    errors = run.error_matrix()
    spacing = run.grid.spacing
    rho = np.array([norm_values(row, spacing, norm) for row in errors])
    radius = float(np.sort(rho)[order_statistic_index(run.n_boot, alpha) - 1])
    return BallRegion(center=run.base_prediction_h, radius=radius, norm=norm)


def sigma_star(run: BootstrapRun) -> Curve:
    """Pointwise standard deviation of the replicate predictions (divisor B)."""
    if run.n_boot < 2:
        raise ParameterError("need at least two replicates for a spread estimate")
    preds = run.boot_predictors
    centered = preds - preds.mean(axis=0)
    return Curve(run.grid, np.sqrt(np.mean(centered * centered, axis=0)))


def coverage_fraction(run: BootstrapRun, sigma: np.ndarray, lam: float) -> float:
    """Share of replicates whose error stays within lam*sigma at every point.

    Right-continuous in lam (boundary replicates count as covered), matching
    the closed-band membership used when the region is evaluated.
    """
    ratios = np.max(np.abs(run.error_matrix()) / sigma[None, :], axis=1)
    return float(np.mean(ratios <= lam))


def bisect_lambda(
    run: BootstrapRun, sigma: Curve, alpha: float, eta: float = 1e-4
) -> float:
    """Band-width multiplier whose Monte Carlo simultaneous coverage is 1-alpha.

    Bisection on the coverage step function p(lam): the bracket starts at
    [0, 2^m] with the upper end doubled until p reaches the target, and the
    loop ends when p(mid) equals the target, the bracket's coverage gap
    drops below ``eta``, or the bracket collapses to adjacent floats (then
    the upper endpoint is returned, whose coverage is >= the target).
    """
    _check_alpha(alpha)
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta!r}")
    sig = np.asarray(sigma.values if isinstance(sigma, Curve) else sigma, dtype=float)
    if sig.shape != (run.grid.tau,):
        raise ParameterError(f"sigma must have length {run.grid.tau}")
    if np.any(sig <= 0.0):
        raise ParameterError("sigma must be strictly positive (floor it first)")

    ratios = np.max(np.abs(run.error_matrix()) / sig[None, :], axis=1)
    b = run.n_boot

    def p(lam: float) -> float:
        return float(np.count_nonzero(ratios <= lam)) / b

    target = 1.0 - alpha
    lam_lo, lam_hi = 0.0, 1.0
    doublings = 0
    while p(lam_hi) < target:
        lam_hi *= 2.0
        doublings += 1
        if doublings > 60:
            raise NonConvergenceError(
                "coverage bracket failed to reach the target after 60 doublings"
            )
    while True:
        lam_mid = 0.5 * (lam_lo + lam_hi)
        p_mid = p(lam_mid)
        if p_mid == target or p(lam_hi) - p(lam_lo) < eta:
            return lam_mid
        if lam_mid == lam_lo or lam_mid == lam_hi:
            return lam_hi
        if p_mid > target:
            lam_hi = lam_mid
        else:
            lam_lo = lam_mid


# relative floor applied to the pointwise spread before dividing by it
SIGMA_FLOOR_ABS = 1e-8
SIGMA_FLOOR_REL = 1e-6


def lambda_region(run: BootstrapRun, alpha: float, eta: float = 1e-4) -> BandRegion:
    """Band centered at the point prediction with half-width lambda*sigma(t).

    sigma is floored at max(1e-8, 1e-6 * max_t sigma(t)) so zero-variance
    points cannot blow up the ratio statistics.
    """
    _check_alpha(alpha)
    sig = sigma_star(run).values
    floor = max(SIGMA_FLOOR_ABS, SIGMA_FLOOR_REL * float(sig.max()))
    sig = np.maximum(sig, floor)
    lam = bisect_lambda(run, Curve(run.grid, sig), alpha, eta)
    center = run.base_prediction_h.values
    half = lam * sig
    if np.all(half == 0.0):
        warnings.warn(
            "prediction band has zero width", DegenerateRegionWarning, stacklevel=2
        )
    return BandRegion(
        lower=Curve(run.grid, center - half),
        upper=Curve(run.grid, center + half),
        center=run.base_prediction_h,
    )


def depth_region(
    run: BootstrapRun,
    alpha: float,
    n_projections: int = 20,
    seed: int = 0,
) -> BandRegion:
    """Envelope of the floor((1-alpha)*B) deepest bootstrap future curves.

    Depths use the random Tukey depth within the replicate set; the deepest
    curve is reported as the band center (for plotting; no metric uses it).
    Ties in depth break toward the lower replicate index.  alpha = 0 keeps
    every replicate.
    """
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha!r}")
    if run.n_boot < 2:
        raise ParameterError("need at least two replicates for a depth envelope")
    keep = _floor_count(run.n_boot, alpha)
    if keep < 1:
        raise ParameterError(
            f"alpha={alpha} is too large: it keeps no replicate out of {run.n_boot}"
        )
    future = run.future_observations()
    depths = random_tukey_depth_values(
        future, run.grid, DepthConfig(n_projections=n_projections, seed=seed)
    )
    order = np.lexsort((np.arange(run.n_boot), -depths))
    kept = future[order[:keep]]
    lower = kept.min(axis=0)
    upper = kept.max(axis=0)
    if np.all(lower == upper):
        warnings.warn(
            "prediction band has zero width", DegenerateRegionWarning, stacklevel=2
        )
    return BandRegion(
        lower=Curve(run.grid, lower),
        upper=Curve(run.grid, upper),
        center=Curve(run.grid, future[order[0]]),
    )
