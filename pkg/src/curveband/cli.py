"""Command-line surface.

Subcommands: ingest, predict, backtest, synth, calibrate, score.  Flags
mirror the JSON config keys; ``--config`` supplies a file whose values the
flags override.  Exit codes: 0 success, 2 data error, 3 config error,
4 numerical failure.
"""

from __future__ import annotations

import csv as _csv
import datetime as dt
import sys

import click
import numpy as np

from . import config as cfgmod
from .bootstrap import BallRegion, BandRegion, build_bootstrap_run
from .curves import Curve
from .errors import (
    NUMERICAL_ERRORS,
    CurvebandError,
    DataError,
    ParameterError,
)
from .evaluation import (
    RegionOutcome,
    fws,
    metrics_table,
    pointwise_contains,
)
from .harness import (
    BacktestConfig,
    CalibrationResult,
    calibrate,
    construct_region,
    rolling_evaluate,
    _derive_seed,
)
from .ingest import (
    DayType,
    FunctionalSample,
    build_daily_curves,
    covariate_matrix,
    day_type_sets,
    load_hourly_csv,
    predecessor_date,
    replace_outliers,
    write_hourly_csv,
)
from .regression import SFPL, ModelSpec, select_k_cv
from .reports import emit_reports
from .semimetrics import fit_semimetric_from_values
from .synthetic import SyntheticSpec, synthetic_far1


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ParameterError(f"bad date {text!r}, expected YYYY-MM-DD") from None


def _parse_k_grid(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ParameterError(f"bad k grid {text!r}, expected e.g. '2,4,8'") from None


def _load_sample(path: str, signal: str, grid_tau: int | None = None) -> FunctionalSample:
    sample = build_daily_curves(load_hourly_csv(path), signal=signal)
    if grid_tau is not None and sample.grid.tau != grid_tau:
        raise ParameterError(
            f"config grid_tau={grid_tau} but the data yields "
            f"{sample.grid.tau}-point daily curves"
        )
    return sample


_config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="JSON config file; flags override its values.",
)


@click.group()
def cli() -> None:
    """Forecast daily curves and build bootstrap prediction regions."""


@cli.command("ingest")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--signal", type=click.Choice(["demand", "price"]), default="demand")
@click.option("--clean/--no-clean", default=False, help="Replace outlier days.")
@click.option("--outlier-window", type=int, default=4)
@click.option("--outlier-threshold", type=float, default=5.0)
def ingest_cmd(input_path, output_path, signal, clean, outlier_window, outlier_threshold):
    """Validate an hourly CSV and write it back normalized."""
    records = load_hourly_csv(input_path)
    sample = build_daily_curves(records, signal=signal)
    replaced = []
    if clean:
        sample, replaced = replace_outliers(sample, outlier_window, outlier_threshold)
        cleaned = {d: i for i, d in enumerate(sample.dates)}
        fixed = []
        for r in records:
            day = r.timestamp.date()
            if day in cleaned:
                v = float(sample.values[cleaned[day], r.timestamp.hour])
                if signal == "demand":
                    r = type(r)(r.timestamp, v, r.price, r.max_temp, r.wind)
                else:
                    r = type(r)(r.timestamp, r.demand, v, r.max_temp, r.wind)
            fixed.append(r)
        records = fixed
    write_hourly_csv(records, output_path)
    counts = {t.value: 0 for t in DayType}
    for d in sample.dates:
        counts[DayType.of(d).value] += 1
    click.echo(
        f"{sample.n_days} days ({counts['weekday']} weekdays, "
        f"{counts['saturday']} saturdays, {counts['sunday']} sundays) "
        f"written to {output_path}"
    )
    if replaced:
        click.echo("replaced outlier days: " + ", ".join(d.isoformat() for d in replaced))


@cli.command("predict")
@_config_option
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--date", "date_text", required=True, help="Target day YYYY-MM-DD.")
@click.option("--signal", type=click.Choice(["demand", "price"]), default="demand")
@click.option("--model", type=click.Choice(list(cfgmod.MODELS)), default=None)
@click.option("--method", type=click.Choice(list(cfgmod.METHODS)), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--b", "n_boot", type=int, default=None, help="Bootstrap replicates.")
@click.option("--seed", type=int, default=None)
@click.option("--k-grid", "k_grid_text", default=None, help="e.g. '2,4,8,16'.")
@click.option("--q-fpca", type=int, default=None)
@click.option("--k-boot-factor", type=float, default=None)
@click.option("--n-projections", type=int, default=None)
@click.option("--eta", type=float, default=None)
def predict_cmd(
    config_path, data_path, date_text, signal, model, method, alpha,
    n_boot, seed, k_grid_text, q_fpca, k_boot_factor, n_projections, eta,
):
    """Predict one day's region and print its band CSV to stdout."""
    cfg = cfgmod.merge_config(
        cfgmod.load_config(config_path) if config_path else None,
        model=model, method=method, alpha=alpha, B=n_boot, seed=seed,
        k_grid=_parse_k_grid(k_grid_text), q_fpca=q_fpca,
        k_boot_factor=k_boot_factor, n_projections=n_projections, eta=eta,
    )
    day = _parse_date(date_text)
    sample = _load_sample(data_path, signal, cfg["grid_tau"])
    rs = day_type_sets(sample, day)
    semimetric = fit_semimetric_from_values(rs.predictors, rs.grid, q=cfg["q_fpca"])
    template = ModelSpec(
        family=cfg["model"], semimetric=semimetric,
        k=max(1, min(cfg["k_grid"])), k_boot_factor=cfg["k_boot_factor"],
    )
    usable_k = [k for k in cfg["k_grid"] if k <= rs.n - 1]
    if not usable_k:
        raise ParameterError(f"k grid {cfg['k_grid']} too large for {rs.n} pairs")
    k = select_k_cv(rs, template, usable_k)
    query_curve = sample.curve(predecessor_date(day))
    query_x = None
    if cfg["model"] == SFPL:
        x_all, _ = covariate_matrix(sample)
        query_x = x_all[sample.index_of(day)]
    from dataclasses import replace as _replace

    run = build_bootstrap_run(
        rs, _replace(template, k=k), query_curve, query_x,
        n_boot=cfg["B"], seed=_derive_seed(cfg["seed"], day.toordinal(), 0),
    )
    region = construct_region(
        run, cfg["method"], cfg["alpha"], n_projections=cfg["n_projections"],
        depth_seed=_derive_seed(cfg["seed"], day.toordinal(), 0, 1), eta=cfg["eta"],
    )
    if isinstance(region, BallRegion) and region.norm.value != "linf":
        click.echo(f"# ball region: norm={region.norm.value} radius={region.radius:.10g}")
        click.echo("t,center")
        for t, c in enumerate(region.center.values, start=1):
            click.echo(f"{t},{c:.10g}")
        return
    band = region if isinstance(region, BandRegion) else region.to_band()
    click.echo("t,lower,center,upper")
    for t in range(sample.grid.tau):
        click.echo(
            f"{t + 1},{band.lower.values[t]:.10g},"
            f"{band.center.values[t]:.10g},{band.upper.values[t]:.10g}"
        )


@cli.command("backtest")
@_config_option
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--start", "start_text", required=True)
@click.option("--end", "end_text", required=True)
@click.option("--signal", type=click.Choice(["demand", "price"]), default="demand")
@click.option("--model", "models", multiple=True, type=click.Choice(list(cfgmod.MODELS)))
@click.option("--method", "methods", multiple=True, type=click.Choice(list(cfgmod.METHODS)))
@click.option("--alpha", "alphas", multiple=True, type=float)
@click.option("--b", "n_boot", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--k-grid", "k_grid_text", default=None)
@click.option("--q-fpca", type=int, default=None)
@click.option("--k-boot-factor", type=float, default=None)
@click.option("--n-projections", type=int, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--formats", default="csv,json,svg", help="Subset of csv,json,svg.")
def backtest_cmd(
    config_path, data_path, start_text, end_text, signal, models, methods,
    alphas, n_boot, seed, k_grid_text, q_fpca, k_boot_factor, n_projections,
    eta, workers, out_dir, formats,
):
    """Rolling one-day-ahead evaluation; writes report files to --out."""
    cfg = cfgmod.merge_config(
        cfgmod.load_config(config_path) if config_path else None,
        B=n_boot, seed=seed, k_grid=_parse_k_grid(k_grid_text), q_fpca=q_fpca,
        k_boot_factor=k_boot_factor, n_projections=n_projections, eta=eta,
    )
    bt = BacktestConfig(
        start=_parse_date(start_text),
        end=_parse_date(end_text),
        methods=tuple(methods) or (cfg["method"],),
        models=tuple(models) or (cfg["model"],),
        alphas=tuple(alphas) or (cfg["alpha"],),
        n_boot=cfg["B"],
        seed=cfg["seed"],
        k_grid=tuple(cfg["k_grid"]),
        q_fpca=cfg["q_fpca"],
        k_boot_factor=cfg["k_boot_factor"],
        n_projections=cfg["n_projections"],
        eta=cfg["eta"],
        workers=workers,
    )
    sample = _load_sample(data_path, signal, cfg["grid_tau"])
    result = rolling_evaluate(bt, sample)
    fmt = tuple(f.strip() for f in formats.split(",") if f.strip())
    written = emit_reports(result, out_dir, formats=fmt, sample=sample)
    click.echo(f"{len(result.results)} day-regions scored, "
               f"{len(result.failures)} failures, {len(written)} files in {out_dir}")


@cli.command("synth")
@click.option("--days", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--contraction", type=float, default=0.4)
@click.option("--noise-scale", type=float, default=3.0)
@click.option("--start-date", "start_text", default="2011-01-01")
@click.option("--out", "out_path", required=True, type=click.Path())
def synth_cmd(days, seed, contraction, noise_scale, start_text, out_path):
    """Generate a synthetic hourly dataset in the ingest schema."""
    spec = SyntheticSpec(n_days=days, contraction=contraction, noise_scale=noise_scale)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    records = synthetic_far1(spec, rng, start_date=_parse_date(start_text))
    write_hourly_csv(records, out_path)
    click.echo(f"{days} synthetic days written to {out_path}")


@cli.command("calibrate")
@click.option("--replicates", type=int, default=200)
@click.option("--method", type=click.Choice(list(cfgmod.METHODS)), default="lambda")
@click.option("--alpha", type=float, default=0.2)
@click.option("--b", "n_boot", type=int, default=200)
@click.option("--days", "window", type=int, default=366, help="Curves per world.")
@click.option("--seed", type=int, default=0)
@click.option("--contraction", type=float, default=0.4)
@click.option("--noise-scale", type=float, default=3.0)
@click.option("--k-grid", "k_grid_text", default="4,8,16,32")
def calibrate_cmd(
    replicates, method, alpha, n_boot, window, seed, contraction, noise_scale,
    k_grid_text,
):
    """Empirical coverage of one method on synthetic worlds, with exact CI."""
    spec = SyntheticSpec(n_days=window, contraction=contraction, noise_scale=noise_scale)
    res: CalibrationResult = calibrate(
        spec, method, alpha, replicates,
        n_boot=n_boot, seed=seed, k_grid=tuple(_parse_k_grid(k_grid_text)),
    )
    click.echo(
        f"method={res.method} alpha={res.alpha:g} replicates={res.n_replicates} "
        f"coverage={res.coverage:.4f} ci99=[{res.ci_low:.4f}, {res.ci_high:.4f}]"
    )


@cli.command("score")
@click.option("--bands", "bands_path", required=True, type=click.Path(),
              help="CSV with columns date,t,lower,upper.")
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--signal", type=click.Choice(["demand", "price"]), default="demand")
@click.option("--alpha", type=float, default=0.05)
def score_cmd(bands_path, data_path, signal, alpha):
    """Score externally supplied bands against the realized curves."""
    sample = _load_sample(data_path, signal)
    per_day: dict[dt.date, dict[int, tuple[float, float]]] = {}
    try:
        with open(bands_path, newline="", encoding="utf-8") as fh:
            reader = _csv.DictReader(fh)
            needed = {"date", "t", "lower", "upper"}
            if reader.fieldnames is None or not needed <= set(reader.fieldnames):
                raise DataError(f"{bands_path}: need columns {sorted(needed)}")
            for line_no, row in enumerate(reader, start=2):
                try:
                    day = dt.date.fromisoformat(row["date"])
                    t = int(row["t"])
                    lo, up = float(row["lower"]), float(row["upper"])
                except ValueError as exc:
                    raise DataError(f"{bands_path} line {line_no}: {exc}") from None
                per_day.setdefault(day, {})[t] = (lo, up)
    except OSError as exc:
        raise DataError(f"cannot read {bands_path}: {exc}") from None

    tau = sample.grid.tau
    rows = []
    for day in sorted(per_day):
        pts = per_day[day]
        if sorted(pts) != list(range(1, tau + 1)):
            raise DataError(f"bands for {day} do not cover t=1..{tau}")
        lower = np.array([pts[t][0] for t in range(1, tau + 1)])
        upper = np.array([pts[t][1] for t in range(1, tau + 1)])
        truth = sample.curve(day)
        band = BandRegion(
            lower=Curve(sample.grid, lower),
            upper=Curve(sample.grid, upper),
            center=Curve(sample.grid, 0.5 * (lower + upper)),
        )
        outcome = RegionOutcome(truth=truth, region=band, alpha=alpha)
        pc = pointwise_contains(band, truth)
        rows.append(
            {
                "day_type": DayType.of(day).value,
                "method": "external",
                "model": "external",
                "alpha": alpha,
                "FCov": 100.0 * float(pc.all()),
                "PCov": 100.0 * float(pc.mean()),
                "AWidth": float((upper - lower).mean()),
                "FWS": fws(outcome),
                "_date": day,
            }
        )
    agg = {
        "day_type": "year",
        "method": "external",
        "model": "external",
        "alpha": alpha,
        "FCov": float(np.mean([r["FCov"] for r in rows])),
        "PCov": float(np.mean([r["PCov"] for r in rows])),
        "AWidth": float(np.mean([r["AWidth"] for r in rows])),
        "FWS": float(np.mean([r["FWS"] for r in rows])),
    }
    click.echo(metrics_table(rows + [agg]), nl=False)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(3)
    except click.exceptions.ClickException as exc:
        exc.show()
        sys.exit(3)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except ParameterError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(3)
    except NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(4)
    except CurvebandError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    main()
