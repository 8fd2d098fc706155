import datetime as dt

import numpy as np
import pytest

from curveband.errors import ParameterError
from curveband.evaluation import contains
from curveband.harness import (
    BacktestConfig,
    calibrate,
    construct_region,
    rolling_evaluate,
)
from curveband.ingest import DayType, HourlyRecord, build_daily_curves
from curveband.reports import emit_reports
from curveband.synthetic import SyntheticSpec, synthetic_far1

from test_bootstrap import random_run


def deterministic_sample(n_days=430, level_amp=0.3):
    """Noise-free seasonal data: distinct daily curves, smooth day-to-day map."""
    start = dt.date(2011, 1, 1)
    tprof = 100.0 + 20.0 * np.sin(2 * np.pi * (np.arange(24) - 8) / 24)
    records = []
    for i in range(n_days):
        day = start + dt.timedelta(days=i)
        level = 1.0 + level_amp * np.sin(2 * np.pi * i / 365.25)
        for h in range(24):
            records.append(
                HourlyRecord(
                    dt.datetime.combine(day, dt.time(h)),
                    float(tprof[h] * level),
                    1.0,
                    20.0,
                    100.0,
                )
            )
    return build_daily_curves(records)


def synthetic_sample(n_days=440, seed=0, **spec_kw):
    rng = np.random.default_rng(seed)
    records = synthetic_far1(SyntheticSpec(n_days=n_days, **spec_kw), rng)
    return build_daily_curves(records)


class TestRollingEvaluate:
    def test_noise_free_data_full_coverage_tiny_widths(self):
        sample = deterministic_sample()
        cfg = BacktestConfig(
            start=dt.date(2012, 1, 10),
            end=dt.date(2012, 1, 23),
            methods=("lp-linf", "lambda", "depth"),
            models=("fnp",),
            alphas=(0.2, 0.05),
            n_boot=100,
            seed=7,
            k_grid=(2, 4, 8),
        )
        result = rolling_evaluate(cfg, sample)
        assert not result.failures
        signal_range = float(sample.values.max() - sample.values.min())
        for r in result.results:
            # Mondays are predicted across a three-day calendar jump, the one
            # target whose map differs from most of its training pairs
            if r.date.weekday() != 0:
                assert r.contained, (r.date, r.method, r.alpha)
            assert r.width < 0.1 * signal_range

    def test_summary_schema_and_year_pooling(self):
        sample = synthetic_sample()
        cfg = BacktestConfig(
            start=dt.date(2012, 1, 10),
            end=dt.date(2012, 1, 19),
            methods=("lambda",),
            models=("fnp",),
            alphas=(0.2,),
            n_boot=60,
            seed=3,
            k_grid=(4, 8),
        )
        result = rolling_evaluate(cfg, sample)
        rows = result.summary_rows()
        assert {
            "day_type", "method", "model", "alpha", "FCov", "PCov", "AWidth", "FWS"
        } == set(rows[0])
        year = [r for r in rows if r["day_type"] == "year"][0]
        by_type = [r for r in rows if r["day_type"] != "year"]
        counts = {}
        for r in result.results:
            counts[r.day_type] = counts.get(r.day_type, 0) + 1
        total = sum(counts.values())
        for metric in ("FCov", "PCov", "AWidth", "FWS"):
            pooled = sum(counts[r["day_type"]] * r[metric] for r in by_type) / total
            assert year[metric] == pytest.approx(pooled, rel=1e-9)

    def test_per_day_failures_are_isolated(self):
        sample = synthetic_sample()
        # duplicate every Saturday curve: Sunday targets (whose predictors are
        # the Saturdays) get a degenerate bandwidth, all other days untouched
        values = sample.values.copy()
        sat_idx = [
            i for i, d in enumerate(sample.dates) if DayType.of(d) is DayType.SATURDAY
        ]
        values[sat_idx] = values[sat_idx[0]]
        broken = sample.with_values(values)
        cfg = BacktestConfig(
            start=dt.date(2012, 1, 9),
            end=dt.date(2012, 1, 15),
            methods=("lp-linf",),
            models=("fnp",),
            alphas=(0.2,),
            n_boot=40,
            seed=5,
            k_grid=(2, 4),
        )
        result = rolling_evaluate(cfg, broken)
        assert len(result.failures) == 1
        assert result.failures[0].date.strftime("%a") == "Sun"
        scored_days = {r.date for r in result.results}
        assert len(scored_days) == 6  # the other days all scored
        # weekday pipelines never touch Saturday curves, so their rows are
        # bitwise identical to a run on the clean sample
        clean = rolling_evaluate(cfg, sample)
        broken_weekdays = [r for r in result.results if r.day_type == "weekday"]
        clean_weekdays = [r for r in clean.results if r.day_type == "weekday"]
        for rb, rc in zip(broken_weekdays, clean_weekdays):
            assert rb.date == rc.date
            assert rb.contained == rc.contained
            np.testing.assert_array_equal(rb.lower, rc.lower)
            np.testing.assert_array_equal(rb.upper, rc.upper)

    def test_lead_in_validation(self):
        sample = synthetic_sample(n_days=120)
        cfg = BacktestConfig(
            start=dt.date(2011, 3, 1), end=dt.date(2011, 3, 2), n_boot=10
        )
        with pytest.raises(ParameterError):
            rolling_evaluate(cfg, sample)

    def test_timing_rows_cover_model_method_pairs(self):
        sample = synthetic_sample()
        cfg = BacktestConfig(
            start=dt.date(2012, 1, 10),
            end=dt.date(2012, 1, 12),
            methods=("lp-linf", "depth"),
            models=("fnp",),
            alphas=(0.2,),
            n_boot=40,
            seed=1,
            k_grid=(4,),
        )
        result = rolling_evaluate(cfg, sample)
        pairs = {(row["model"], row["method"]) for row in result.timing_rows()}
        assert pairs == {("fnp", "lp-linf"), ("fnp", "depth")}
        assert all(row["mean_seconds"] >= 0 for row in result.timing_rows())

    def test_worker_count_does_not_change_results(self, tmp_path):
        sample = synthetic_sample()
        base = dict(
            start=dt.date(2012, 1, 10),
            end=dt.date(2012, 1, 16),
            methods=("lp-linf", "lambda"),
            models=("fnp",),
            alphas=(0.2,),
            n_boot=50,
            seed=11,
            k_grid=(4, 8),
        )
        r1 = rolling_evaluate(BacktestConfig(**base, workers=1), sample)
        r3 = rolling_evaluate(BacktestConfig(**base, workers=3), sample)
        out1 = emit_reports(r1, tmp_path / "w1", formats=("csv", "json"))
        out3 = emit_reports(r3, tmp_path / "w3", formats=("csv", "json"))
        names1 = {p.name for p in out1}
        assert names1 == {p.name for p in out3}
        for name in names1:
            if name == "timings.csv":  # wall-clock, excluded from the contract
                continue
            assert (tmp_path / "w1" / name).read_bytes() == (
                tmp_path / "w3" / name
            ).read_bytes(), name


class TestConstructRegion:
    def test_unknown_method(self, grid24, rng):
        run = random_run(rng, grid24, 20)
        with pytest.raises(ParameterError):
            construct_region(run, "nope", 0.2)

    def test_depth_envelope_contains_its_center(self, grid24, rng):
        for seed in range(5):
            run = random_run(np.random.default_rng(seed), grid24, 40)
            band = construct_region(run, "depth", 0.2, depth_seed=seed)
            assert contains(band, band.center)


class TestCalibrate:
    def test_coverage_in_loose_band(self):
        spec = SyntheticSpec(n_days=62, contraction=0.4, noise_scale=3.0)
        res = calibrate(
            spec, "lambda", 0.2, 100, n_boot=60, k_grid=(4, 8), seed=13
        )
        assert res.n_replicates == 100
        assert 0.6 <= res.coverage <= 0.97
        assert res.ci_low <= res.coverage <= res.ci_high

    def test_nested_alphas_monotone_on_same_seeds(self):
        spec = SyntheticSpec(n_days=62, contraction=0.4, noise_scale=3.0)
        cov = {}
        for alpha in (0.2, 0.05):
            for method in ("lp-linf", "lambda"):
                cov[(method, alpha)] = calibrate(
                    spec, method, alpha, 100, n_boot=60, k_grid=(4, 8), seed=21
                ).coverage
        assert cov[("lp-linf", 0.05)] >= cov[("lp-linf", 0.2)]
        assert cov[("lambda", 0.05)] >= cov[("lambda", 0.2)]

    def test_replicate_floor_enforced(self):
        spec = SyntheticSpec(n_days=62)
        with pytest.raises(ParameterError):
            calibrate(spec, "lambda", 0.2, 99)
