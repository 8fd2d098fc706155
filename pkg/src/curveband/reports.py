"""Report emission: metric tables, per-day scores, and region files.

File names are deterministic (`<date>_<model>_<method>_<alpha>.<ext>`) and
the contents depend only on the backtest results, so identical runs emit
byte-identical files.  Wall-clock timings go to a separate ``timings.csv``,
which is the one file that varies between runs.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .errors import DataError, ParameterError
from .evaluation import format_number, metrics_table
from .harness import BacktestResult, DayResult
from .ingest import FunctionalSample, day_type_sets

FORMATS = ("csv", "json", "svg")


def _region_stem(r: DayResult) -> str:
    return f"{r.date.isoformat()}_{r.model}_{r.method}_{format(r.alpha, 'g')}"


def _region_csv(r: DayResult) -> str:
    lines = ["t,lower,center,upper,truth"]
    for t in range(len(r.center)):
        lines.append(
            ",".join(
                (
                    str(t + 1),
                    format_number(None if r.lower is None else r.lower[t]),
                    format_number(r.center[t]),
                    format_number(None if r.upper is None else r.upper[t]),
                    format_number(r.truth[t]),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _region_json(r: DayResult) -> str:
    payload = {
        "date": r.date.isoformat(),
        "day_type": r.day_type,
        "model": r.model,
        "method": r.method,
        "alpha": r.alpha,
        "contained": bool(r.contained),
        "pcov_fraction": r.pcov_fraction,
        "width": r.width,
        "fws": r.fws,
        "radius": r.radius,
        "center": list(r.center),
        "truth": list(r.truth),
        "lower": None if r.lower is None else list(r.lower),
        "upper": None if r.upper is None else list(r.upper),
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# static SVG rendering (no plotting dependency, deterministic output)

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 50, 15, 30, 35


def _polyline(xs, ys, stroke: str, width: float, dash: str | None = None) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline fill="none" stroke="{stroke}" stroke-width="{width}"'
        f'{dash_attr} points="{pts}" />'
    )


def region_svg(r: DayResult, history: np.ndarray | None = None) -> str:
    """History curves (grey), realized curve, center prediction, band limits."""
    series = [r.center, r.truth]
    if r.lower is not None:
        series += [r.lower, r.upper]
    stacked = [history] if history is not None and len(history) else []
    stacked += [np.asarray(s)[None, :] for s in series]
    all_vals = np.concatenate(stacked)
    lo, hi = float(all_vals.min()), float(all_vals.max())
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    tau = len(r.center)

    def sx(t):
        return _ML + (_W - _ML - _MR) * t / max(tau - 1, 1)

    def sy(v):
        return _MT + (_H - _MT - _MB) * (hi - v) / (hi - lo)

    xs = [sx(t) for t in range(tau)]
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white" />',
        f'<text x="{_W // 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{_region_stem(r)}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        'stroke="black" stroke-width="1" />',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        'stroke="black" stroke-width="1" />',
        f'<text x="{_ML}" y="{_H - 12}" font-size="11" font-family="sans-serif">t=1</text>',
        f'<text x="{_W - _MR - 30}" y="{_H - 12}" font-size="11" '
        f'font-family="sans-serif">t={tau}</text>',
        f'<text x="5" y="{_MT + 10}" font-size="11" font-family="sans-serif">'
        f"{hi:.6g}</text>",
        f'<text x="5" y="{_H - _MB}" font-size="11" font-family="sans-serif">'
        f"{lo:.6g}</text>",
    ]
    if history is not None:
        for row in history:
            parts.append(_polyline(xs, [sy(v) for v in row], "#cccccc", 0.7))
    if r.lower is not None:
        parts.append(_polyline(xs, [sy(v) for v in r.lower], "#000000", 1.2, dash="6,4"))
        parts.append(_polyline(xs, [sy(v) for v in r.upper], "#000000", 1.2, dash="6,4"))
    parts.append(_polyline(xs, [sy(v) for v in r.truth], "#d62728", 1.5))
    parts.append(_polyline(xs, [sy(v) for v in r.center], "#000000", 1.5))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------


def per_day_csv(result: BacktestResult) -> str:
    lines = ["date,day_type,model,method,alpha,contained,pcov,width,fws"]
    for r in result.results:
        lines.append(
            ",".join(
                (
                    r.date.isoformat(),
                    r.day_type,
                    r.model,
                    r.method,
                    format(r.alpha, "g"),
                    str(int(r.contained)),
                    format_number(r.pcov_fraction),
                    format_number(r.width),
                    format_number(r.fws),
                )
            )
        )
    return "\n".join(lines) + "\n"


def timings_csv(result: BacktestResult) -> str:
    lines = ["model,method,mean_seconds,days"]
    for row in result.timing_rows():
        lines.append(
            f"{row['model']},{row['method']},{row['mean_seconds']:.4f},{row['days']}"
        )
    return "\n".join(lines) + "\n"


def failures_csv(result: BacktestResult) -> str:
    lines = ["date,model,message"]
    for f in result.failures:
        msg = f.message.replace('"', "'")
        lines.append(f'{f.date.isoformat()},{f.model},"{msg}"')
    return "\n".join(lines) + "\n"


def emit_reports(
    result: BacktestResult,
    out_dir,
    formats=("csv", "json", "svg"),
    sample: FunctionalSample | None = None,
) -> list[Path]:
    """Write summary, per-day, timing, and per-region files.

    ``sample`` is only used to draw the grey history curves in the SVGs.
    Returns the written paths; an empty result emits nothing but a warning.
    """
    for f in formats:
        if f not in FORMATS:
            raise ParameterError(f"unknown report format {f!r}")
    if not result.results:
        warnings.warn("no results to report; nothing written", stacklevel=2)
        return []
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc}") from None

    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        path = out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)

    if "csv" in formats:
        emit("summary.csv", metrics_table(result.summary_rows()))
        emit("per_day.csv", per_day_csv(result))
        emit("timings.csv", timings_csv(result))
        if result.failures:
            emit("failures.csv", failures_csv(result))

    history_cache: dict[tuple, np.ndarray] = {}
    for r in result.results:
        stem = _region_stem(r)
        if "csv" in formats:
            emit(f"{stem}.csv", _region_csv(r))
        if "json" in formats:
            emit(f"{stem}.json", _region_json(r))
        if "svg" in formats:
            history = None
            if sample is not None:
                key = (r.date,)
                if key not in history_cache:
                    history_cache[key] = day_type_sets(sample, r.date).responses
                history = history_cache[key]
            emit(f"{stem}.svg", region_svg(r, history))
    return written
