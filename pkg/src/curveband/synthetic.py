"""Synthetic seasonal curve processes for calibration experiments.

Generates a first-order autoregressive curve process: each day's curve is a
smooth contraction of the previous day's curve toward a mean profile, plus
Gaussian errors that are independent across days and grid points.  The
error standard deviation is either constant or follows a per-point profile.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .curves import Grid
from .errors import ParameterError
from .ingest import HourlyRecord


def default_mean_profile(grid: Grid) -> np.ndarray:
    """Smooth daily shape: a base level with one sinusoidal swing per cycle."""
    t = np.arange(grid.tau)
    return 100.0 + 20.0 * np.sin(2.0 * np.pi * (t - 8.0) / grid.tau)


@dataclass(frozen=True)
class SyntheticSpec:
    """Curve process: contraction toward a mean profile plus Gaussian noise.

    ``noise_profile`` (length tau) overrides the constant ``noise_scale``
    with per-point standard deviations.  The contraction magnitude must stay
    below 1 for stationarity.
    """

    n_days: int
    grid: Grid = Grid(24)
    contraction: float = 0.4
    mean_profile: np.ndarray | None = None
    noise_scale: float = 3.0
    noise_profile: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.n_days, int) or self.n_days < 1:
            raise ParameterError(f"n_days must be a positive integer, got {self.n_days!r}")
        if not abs(self.contraction) < 1.0:
            raise ParameterError(
                f"contraction magnitude must be below 1 for stationarity, "
                f"got {self.contraction!r}"
            )
        if self.noise_scale < 0:
            raise ParameterError("noise_scale must be nonnegative")
        if self.mean_profile is not None and np.shape(self.mean_profile) != (self.grid.tau,):
            raise ParameterError("mean_profile must have length tau")
        if self.noise_profile is not None:
            prof = np.asarray(self.noise_profile, dtype=float)
            if prof.shape != (self.grid.tau,) or np.any(prof < 0):
                raise ParameterError("noise_profile must be tau nonnegative values")

    def mean(self) -> np.ndarray:
        if self.mean_profile is not None:
            return np.asarray(self.mean_profile, dtype=float)
        return default_mean_profile(self.grid)

    def noise_std(self) -> np.ndarray:
        if self.noise_profile is not None:
            return np.asarray(self.noise_profile, dtype=float)
        return np.full(self.grid.tau, self.noise_scale)


def far1_curves(
    spec: SyntheticSpec,
    rng: np.random.Generator,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Daily curve matrix (n_days, tau) of the autoregressive process.

    The orbit starts at the mean profile unless ``start`` is given; with
    zero noise it is fully deterministic.
    """
    mean = spec.mean()
    std = spec.noise_std()
    c = spec.contraction
    out = np.empty((spec.n_days, spec.grid.tau))
    state = mean.copy() if start is None else np.asarray(start, dtype=float).copy()
    for i in range(spec.n_days):
        eps = rng.standard_normal(spec.grid.tau) * std
        state = mean + c * (state - mean) + eps
        out[i] = state
    return out


def synthetic_far1(
    spec: SyntheticSpec,
    rng: np.random.Generator,
    start_date: dt.date = dt.date(2011, 1, 1),
) -> list[HourlyRecord]:
    """Hourly records in the ingest schema with synthetic demand and price.

    Demand and price are independent draws of the process; daily maximum
    temperature follows a mild seasonal cycle (so degree-day covariates
    vary) and wind production is positive noise, both constant within a day.
    """
    if spec.grid.tau != 24:
        raise ParameterError("hourly emission needs a 24-point grid")
    demand = far1_curves(spec, rng)
    price = far1_curves(spec, rng)
    temps = (
        18.0
        + 12.0 * np.sin(2.0 * np.pi * np.arange(spec.n_days) / 365.25)
        + rng.standard_normal(spec.n_days) * 2.0
    )
    wind = np.abs(rng.standard_normal(spec.n_days) * 150.0 + 500.0)
    records = []
    for i in range(spec.n_days):
        day = start_date + dt.timedelta(days=i)
        for h in range(24):
            records.append(
                HourlyRecord(
                    timestamp=dt.datetime.combine(day, dt.time(hour=h)),
                    demand=float(demand[i, h]),
                    price=float(price[i, h]),
                    max_temp=float(temps[i]),
                    wind=float(wind[i]),
                )
            )
    return records
