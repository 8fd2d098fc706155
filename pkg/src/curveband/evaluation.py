"""Region quality metrics.

Containment is checked with closed inequalities, matching the closed
membership of the region definitions.  FCov is the share of regions that
contain the whole realized curve; PCov the mean share of grid points
covered; AWidth the mean band width over the grid; the functional Winkler
score (FWS) is the rectangle-rule L1 distance between the band limits plus
a 2/alpha-scaled L1 penalty whenever the realized curve exits the band
anywhere.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bootstrap import BallRegion, BandRegion, PredictionRegion
from .curves import Curve, NormTag, l1_distance, norm_values, require_same_grid
from .errors import ParameterError, UnsupportedRegionError


@dataclass(frozen=True)
class RegionOutcome:
    """One realized curve against the region predicted for it."""

    truth: Curve
    region: PredictionRegion
    alpha: float

    def __post_init__(self) -> None:
        center = (
            self.region.center
            if isinstance(self.region, BallRegion)
            else self.region.lower
        )
        require_same_grid(self.truth, center)
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class RegionReport:
    """Aggregate metrics over a set of outcomes.

    ``pcov``/``awidth``/``fws`` are ``None`` when the set holds only ball
    regions without a band representation.
    """

    fcov: float
    pcov: float | None
    awidth: float | None
    fws: float | None
    j_count: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.fcov <= 100.0:
            raise ParameterError("fcov must be a percentage")
        if self.pcov is not None and not self.fcov <= self.pcov + 1e-9:
            raise ParameterError("functional coverage cannot exceed pointwise coverage")


def as_band(region: PredictionRegion) -> BandRegion:
    """Band view of a region; sup-norm balls convert, other balls do not."""
    if isinstance(region, BandRegion):
        return region
    return region.to_band()


def has_band(region: PredictionRegion) -> bool:
    return isinstance(region, BandRegion) or region.norm is NormTag.LINF


def contains(region: PredictionRegion, truth: Curve) -> bool:
    """Whole-curve membership (closed inequalities)."""
    if isinstance(region, BallRegion):
        require_same_grid(region.center, truth)
        dist = norm_values(
            truth.values - region.center.values, truth.grid.spacing, region.norm
        )
        return bool(dist <= region.radius)
    require_same_grid(region.lower, truth)
    return bool(
        np.all(region.lower.values <= truth.values)
        and np.all(truth.values <= region.upper.values)
    )


def pointwise_contains(region: PredictionRegion, truth: Curve) -> np.ndarray:
    """Per-grid-point membership; needs a band representation."""
    band = as_band(region)
    require_same_grid(band.lower, truth)
    return (band.lower.values <= truth.values) & (truth.values <= band.upper.values)


def fcov(outcomes: Sequence[RegionOutcome]) -> float:
    """Percentage of outcomes whose whole curve lies inside its region."""
    if not outcomes:
        raise ParameterError("no outcomes to score")
    return 100.0 * float(np.mean([contains(o.region, o.truth) for o in outcomes]))


def pcov(outcomes: Sequence[RegionOutcome]) -> float:
    """Mean percentage of grid points covered, over the outcomes."""
    if not outcomes:
        raise ParameterError("no outcomes to score")
    return 100.0 * float(
        np.mean([pointwise_contains(o.region, o.truth).mean() for o in outcomes])
    )


def band_width(region: PredictionRegion) -> float:
    """Mean width over the grid; constant-width balls use 2*radius exactly."""
    if isinstance(region, BallRegion):
        if region.norm is not NormTag.LINF:
            raise UnsupportedRegionError(
                f"{region.norm.value} ball has no width profile"
            )
        return 2.0 * region.radius
    return float(region.widths.mean())


def awidth(regions: Iterable[PredictionRegion]) -> float:
    """Mean over regions of the mean band width over the grid."""
    widths = [band_width(r) for r in regions]
    if not widths:
        raise ParameterError("no regions to average")
    return float(np.mean(widths))


def winkler_pointwise(l: float, u: float, z: float, alpha: float) -> float:
    """Interval score at one grid point: width plus out-of-interval penalty."""
    if l > u:
        raise ParameterError(f"interval limits out of order: {l} > {u}")
    score = u - l
    if z < l:
        score += (2.0 / alpha) * (l - z)
    elif z > u:
        score += (2.0 / alpha) * (z - u)
    return score


def fws(outcome: RegionOutcome) -> float:
    """Functional Winkler score of one outcome.

    The penalty uses the smaller of the L1 distances from the realized
    curve to either limit, even when the curve crosses both limits at
    different points.
    """
    band = as_band(outcome.region)
    truth = outcome.truth
    require_same_grid(band.lower, truth)
    score = l1_distance(band.lower, band.upper)
    outside = bool(
        np.any(truth.values < band.lower.values)
        or np.any(truth.values > band.upper.values)
    )
    if outside:
        score += (2.0 / outcome.alpha) * min(
            l1_distance(band.lower, truth), l1_distance(band.upper, truth)
        )
    return score


def fws_mean(outcomes: Sequence[RegionOutcome]) -> float:
    if not outcomes:
        raise ParameterError("no outcomes to score")
    return float(np.mean([fws(o) for o in outcomes]))


def make_report(outcomes: Sequence[RegionOutcome]) -> RegionReport:
    """Aggregate FCov/PCov/AWidth/FWS over one outcome set.

    Ball regions without a band representation contribute to FCov only; a
    warning marks their exclusion from the band metrics.
    """
    if not outcomes:
        raise ParameterError("no outcomes to score")
    coverage = fcov(outcomes)
    banded = [o for o in outcomes if has_band(o.region)]
    if len(banded) < len(outcomes):
        warnings.warn(
            f"{len(outcomes) - len(banded)} ball region(s) lack a band "
            "representation and are excluded from PCov/AWidth/FWS",
            stacklevel=2,
        )
    if not banded:
        return RegionReport(
            fcov=coverage, pcov=None, awidth=None, fws=None, j_count=len(outcomes)
        )
    return RegionReport(
        fcov=coverage,
        pcov=pcov(banded),
        awidth=awidth([o.region for o in banded]),
        fws=fws_mean(banded),
        j_count=len(outcomes),
    )


# ---------------------------------------------------------------------------
# table emission

TABLE_COLUMNS = ("day_type", "method", "model", "alpha", "FCov", "PCov", "AWidth", "FWS")


def format_number(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".10g")


def metrics_table(rows: Sequence[dict]) -> str:
    """CSV text with one row per (day_type, method, model, alpha) group."""
    buf = io.StringIO()
    buf.write(",".join(TABLE_COLUMNS) + "\n")
    for row in rows:
        buf.write(
            ",".join(
                (
                    str(row["day_type"]),
                    str(row["method"]),
                    str(row["model"]),
                    format(float(row["alpha"]), "g"),
                    format_number(row["FCov"]),
                    format_number(row["PCov"]),
                    format_number(row["AWidth"]),
                    format_number(row["FWS"]),
                )
            )
            + "\n"
        )
    return buf.getvalue()
