"""Hourly data ingestion: daily curves, covariates, day types, cleaning.

Input CSV schema (header required, ISO-8601 timestamps at hour resolution):

    timestamp,demand_mwh,price_cent_kwh,max_temp_c,wind_mwh

Timestamps must be strictly increasing and hour-aligned with no gaps.  Two
clock-change patterns are tolerated and normalized: a single missing hour at
02:00 or 03:00 (filled by linear interpolation) and a duplicated timestamp
at 02:00 or 03:00 (the two rows are averaged).  Any other missing hour is a
gap error naming the missing timestamps.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import Curve, Grid
from .errors import DataError, InsufficientHistoryError, ParameterError
from .regression import RegressionSample

CSV_COLUMNS = ("timestamp", "demand_mwh", "price_cent_kwh", "max_temp_c", "wind_mwh")

# hours at which a clock change may legitimately drop or duplicate a stamp
_DST_HOURS = (2, 3)

DEMAND = "demand"
PRICE = "price"


class DayType(enum.Enum):
    WEEKDAY = "weekday"
    SATURDAY = "saturday"
    SUNDAY = "sunday"

    @classmethod
    def of(cls, day: dt.date) -> "DayType":
        wd = day.weekday()
        if wd == 5:
            return cls.SATURDAY
        if wd == 6:
            return cls.SUNDAY
        return cls.WEEKDAY


@dataclass(frozen=True)
class HourlyRecord:
    timestamp: dt.datetime
    demand: float
    price: float
    max_temp: float
    wind: float


def _parse_row(row: dict, colmap: dict, line_no: int) -> HourlyRecord:
    def get(name: str) -> str:
        col = colmap[name]
        if col not in row or row[col] is None:
            raise DataError(f"line {line_no}: missing column {col!r}")
        return row[col]

    try:
        ts = dt.datetime.fromisoformat(get("timestamp").strip())
    except ValueError as exc:
        raise DataError(f"line {line_no}: bad timestamp: {exc}") from None
    if ts.minute or ts.second or ts.microsecond:
        raise DataError(f"line {line_no}: timestamp {ts} is not hour-aligned")
    vals = {}
    for name in CSV_COLUMNS[1:]:
        text = get(name).strip()
        try:
            v = float(text)
        except ValueError:
            raise DataError(f"line {line_no}: non-numeric {name}={text!r}") from None
        if not math.isfinite(v):
            raise DataError(f"line {line_no}: non-finite {name}={text!r}")
        vals[name] = v
    return HourlyRecord(
        timestamp=ts,
        demand=vals["demand_mwh"],
        price=vals["price_cent_kwh"],
        max_temp=vals["max_temp_c"],
        wind=vals["wind_mwh"],
    )


def _average(a: HourlyRecord, b: HourlyRecord) -> HourlyRecord:
    return HourlyRecord(
        timestamp=a.timestamp,
        demand=0.5 * (a.demand + b.demand),
        price=0.5 * (a.price + b.price),
        max_temp=a.max_temp,
        wind=a.wind,
    )


def _interpolate(prev: HourlyRecord, nxt: HourlyRecord, ts: dt.datetime) -> HourlyRecord:
    return HourlyRecord(
        timestamp=ts,
        demand=0.5 * (prev.demand + nxt.demand),
        price=0.5 * (prev.price + nxt.price),
        max_temp=prev.max_temp,
        wind=prev.wind,
    )


def load_hourly_csv(path, column_map: dict | None = None) -> list[HourlyRecord]:
    """Load and validate an hourly CSV, normalizing clock-change artefacts.

    ``column_map`` maps the logical column names to the file's header names
    (identity by default).  Raises a data error with the offending line
    number on parse problems, and a gap error listing every missing hour.
    """
    colmap = {name: name for name in CSV_COLUMNS}
    if column_map:
        colmap.update(column_map)
    records: list[HourlyRecord] = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        missing_cols = [colmap[n] for n in CSV_COLUMNS if colmap[n] not in reader.fieldnames]
        if missing_cols:
            raise DataError(f"{path}: missing columns {missing_cols}")
        for line_no, row in enumerate(reader, start=2):
            records.append(_parse_row(row, colmap, line_no))
    if not records:
        raise DataError(f"{path}: no data rows")

    hour = dt.timedelta(hours=1)
    out: list[HourlyRecord] = [records[0]]
    gaps: list[dt.datetime] = []
    for rec in records[1:]:
        prev = out[-1]
        if rec.timestamp == prev.timestamp:
            if rec.timestamp.hour in _DST_HOURS:
                out[-1] = _average(prev, rec)  # duplicated clock-change hour
                continue
            raise DataError(f"duplicate timestamp {rec.timestamp}")
        if rec.timestamp < prev.timestamp:
            raise DataError(
                f"timestamps not increasing: {rec.timestamp} after {prev.timestamp}"
            )
        expected = prev.timestamp + hour
        if rec.timestamp != expected:
            missing = []
            ts = expected
            while ts < rec.timestamp:
                missing.append(ts)
                ts += hour
            if len(missing) == 1 and missing[0].hour in _DST_HOURS:
                out.append(_interpolate(prev, rec, missing[0]))  # skipped hour
            else:
                gaps.extend(missing)
        out.append(rec)
    if gaps:
        shown = ", ".join(str(t) for t in gaps[:24])
        more = "" if len(gaps) <= 24 else f" (+{len(gaps) - 24} more)"
        raise DataError(f"missing hours: {shown}{more}")
    return out


def write_hourly_csv(records: list[HourlyRecord], path) -> None:
    """Write records in the ingest schema (inverse of ``load_hourly_csv``)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            # repr round-trips floats exactly
            writer.writerow(
                (
                    r.timestamp.isoformat(sep=" "),
                    repr(r.demand),
                    repr(r.price),
                    repr(r.max_temp),
                    repr(r.wind),
                )
            )


def hdd_cdd(temp: float) -> tuple[float, float]:
    """Heating/cooling degree-day transforms of a daily maximum temperature.

    At most one of the pair is nonzero (dead band between 20 and 24 degrees).
    """
    return max(20.0 - temp, 0.0), max(temp - 24.0, 0.0)


@dataclass(frozen=True)
class FunctionalSample:
    """Dated daily curves of one signal plus per-day scalar covariates.

    ``covariates`` holds per-day columns: hdd, cdd, demand_total, wind.
    Daily covariate values are read from the first hour of each day; the
    daily demand total is the sum of the 24 hourly demand values.
    """

    grid: Grid
    signal: str
    dates: tuple[dt.date, ...]
    values: np.ndarray  # (n_days, tau)
    covariates: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.dates)
        if self.values.shape != (n, self.grid.tau):
            raise ParameterError("values must be (n_days, tau)")
        if any(
            self.dates[i] + dt.timedelta(days=1) != self.dates[i + 1]
            for i in range(n - 1)
        ):
            raise ParameterError("dates must be consecutive days")
        for name, col in self.covariates.items():
            if col.shape != (n,):
                raise ParameterError(f"covariate {name!r} must have one value per day")

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def index_of(self, day: dt.date) -> int:
        offset = (day - self.dates[0]).days
        if not 0 <= offset < self.n_days:
            raise InsufficientHistoryError(f"{day} is outside the loaded range")
        return offset

    def curve(self, day: dt.date) -> Curve:
        return Curve(self.grid, self.values[self.index_of(day)])

    def day_type(self, day: dt.date) -> DayType:
        return DayType.of(day)

    def with_values(self, values: np.ndarray) -> "FunctionalSample":
        return FunctionalSample(
            grid=self.grid,
            signal=self.signal,
            dates=self.dates,
            values=values,
            covariates=self.covariates,
        )


def covariate_matrix(sample: FunctionalSample) -> tuple[np.ndarray, tuple[str, ...]]:
    """Exogenous covariate columns for the sample's signal.

    Demand models use (hdd, cdd); price models use the same-day demand total
    and wind production, standing in for ideal forecasts of both.
    """
    names = ("hdd", "cdd") if sample.signal == DEMAND else ("demand_total", "wind")
    return np.column_stack([sample.covariates[n] for n in names]), names


def build_daily_curves(
    records: list[HourlyRecord], signal: str = DEMAND, spacing: float = 1.0
) -> FunctionalSample:
    """Segment a complete hourly series into daily curves with covariates.

    Partial days at either end are dropped with a warning; interior partial
    days cannot occur after gap validation.
    """
    if signal not in (DEMAND, PRICE):
        raise ParameterError(f"signal must be {DEMAND!r} or {PRICE!r}")
    if not records:
        raise DataError("no records")
    by_day: dict[dt.date, list[HourlyRecord]] = {}
    for r in records:
        by_day.setdefault(r.timestamp.date(), []).append(r)

    days = sorted(by_day)
    for edge in (0, -1):
        if len(by_day[days[edge]]) != 24:
            warnings.warn(
                f"dropping partial day {days[edge]} "
                f"({len(by_day[days[edge]])} hours)",
                stacklevel=2,
            )
            del by_day[days[edge]]
            days = sorted(by_day)
            if not days:
                raise DataError("no complete days")
    for day in days:
        rows = by_day[day]
        if [r.timestamp.hour for r in rows] != list(range(24)):
            raise DataError(f"day {day} does not cover hours 0..23")

    grid = Grid(24, spacing)
    values = np.empty((len(days), 24))
    hdd = np.empty(len(days))
    cdd = np.empty(len(days))
    demand_total = np.empty(len(days))
    wind = np.empty(len(days))
    for i, day in enumerate(days):
        rows = by_day[day]
        values[i] = [r.demand if signal == DEMAND else r.price for r in rows]
        hdd[i], cdd[i] = hdd_cdd(rows[0].max_temp)
        demand_total[i] = sum(r.demand for r in rows)
        wind[i] = rows[0].wind
    return FunctionalSample(
        grid=grid,
        signal=signal,
        dates=tuple(days),
        values=values,
        covariates={"hdd": hdd, "cdd": cdd, "demand_total": demand_total, "wind": wind},
    )


def predecessor_date(day: dt.date) -> dt.date:
    """Day whose curve predicts ``day``: Saturdays and Sundays look one day
    back (Friday, Saturday); weekdays look back to the previous weekday
    (Friday before a Monday)."""
    if DayType.of(day) is DayType.WEEKDAY and day.weekday() == 0:
        return day - dt.timedelta(days=3)
    return day - dt.timedelta(days=1)


WINDOW_DAYS = 365


def day_type_sets(sample: FunctionalSample, target_date: dt.date) -> RegressionSample:
    """Training triples for one target day from its trailing one-year window.

    Response days are the window days sharing the target's day type; each
    pairs with its predecessor's curve and its own covariate row.  Window
    days whose predecessor precedes the loaded range are dropped.
    """
    first = sample.dates[0]
    if (target_date - first).days < WINDOW_DAYS:
        raise InsufficientHistoryError(
            f"{target_date} needs {WINDOW_DAYS} prior days; data starts {first}"
        )
    t_type = DayType.of(target_date)
    x_all, _ = covariate_matrix(sample)

    preds, covs, resps, indices = [], [], [], []
    for back in range(WINDOW_DAYS, 0, -1):
        day = target_date - dt.timedelta(days=back)
        if DayType.of(day) is not t_type:
            continue
        prev = predecessor_date(day)
        if prev < first:
            continue
        i = sample.index_of(day)
        preds.append(sample.values[sample.index_of(prev)])
        covs.append(x_all[i])
        resps.append(sample.values[i])
        indices.append(i)
    if not indices:
        raise InsufficientHistoryError(
            f"no usable {t_type.value} pairs before {target_date}"
        )
    return RegressionSample(
        grid=sample.grid,
        predictors=np.stack(preds),
        covariates=np.stack(covs),
        responses=np.stack(resps),
        indices=np.array(indices),
    )


# trailing same-type days consulted when screening for outliers
_SCREEN_DEPTH = 8
_MIN_SCREEN = 3


def replace_outliers(
    sample: FunctionalSample, window: int, threshold: float
) -> tuple[FunctionalSample, list[dt.date]]:
    """Replace days that sit far from their recent same-day-type shape.

    A day is flagged when the L2 distance of its curve to the pointwise
    median of its trailing same-type days exceeds ``threshold`` times the
    median such distance within its day type.  Flagged curves are replaced
    by the triangular-weighted average of the ``window`` nearest unflagged
    same-type days.  Returns the cleaned sample and the audit list of
    replaced dates.
    """
    if not isinstance(window, int) or window < 1:
        raise ParameterError(f"window must be a positive integer, got {window!r}")
    spacing = sample.grid.spacing
    by_type: dict[DayType, list[int]] = {t: [] for t in DayType}
    for i, day in enumerate(sample.dates):
        by_type[DayType.of(day)].append(i)

    dist = np.full(sample.n_days, np.nan)
    for idxs in by_type.values():
        for pos, i in enumerate(idxs):
            trail = idxs[max(0, pos - _SCREEN_DEPTH) : pos]
            if len(trail) < _MIN_SCREEN:
                continue
            med = np.median(sample.values[trail], axis=0)
            diff = sample.values[i] - med
            dist[i] = np.sqrt(spacing * np.sum(diff * diff))

    flagged: set[int] = set()
    for idxs in by_type.values():
        d = dist[idxs]
        finite = d[np.isfinite(d)]
        if finite.size == 0:
            continue
        scale = float(np.median(finite))
        for i in idxs:
            if np.isfinite(dist[i]) and dist[i] > threshold * scale:
                flagged.add(i)

    values = sample.values.copy()
    replaced: list[dt.date] = []
    for i in sorted(flagged):
        peers = [
            j
            for j in by_type[DayType.of(sample.dates[i])]
            if j != i and j not in flagged
        ]
        if not peers:
            warnings.warn(
                f"no clean neighbours to repair {sample.dates[i]}", stacklevel=2
            )
            continue
        peers.sort(key=lambda j: (abs(j - i), j))
        chosen = peers[:window]
        weights = np.array([len(chosen) - r for r in range(len(chosen))], dtype=float)
        weights /= weights.sum()
        values[i] = weights @ sample.values[chosen]
        replaced.append(sample.dates[i])
    return sample.with_values(values), replaced
