import numpy as np
import pytest

from curveband.curves import Grid
from curveband.errors import ParameterError
from curveband.synthetic import (
    SyntheticSpec,
    default_mean_profile,
    far1_curves,
    synthetic_far1,
)


class TestSpecValidation:
    def test_rejects_unstable_contraction(self):
        with pytest.raises(ParameterError):
            SyntheticSpec(n_days=10, contraction=1.0)
        with pytest.raises(ParameterError):
            SyntheticSpec(n_days=10, contraction=-1.3)

    def test_rejects_bad_profile(self):
        with pytest.raises(ParameterError):
            SyntheticSpec(n_days=10, noise_profile=np.ones(7))


class TestFar1Curves:
    def test_zero_noise_orbit_deterministic(self):
        spec = SyntheticSpec(n_days=40, noise_scale=0.0, contraction=0.6)
        start = default_mean_profile(Grid(24)) + 25.0
        a = far1_curves(spec, np.random.default_rng(1), start=start)
        b = far1_curves(spec, np.random.default_rng(2), start=start)
        np.testing.assert_array_equal(a, b)
        # geometric decay toward the mean profile
        mean = spec.mean()
        gaps = np.abs(a - mean).max(axis=1)
        assert gaps[-1] < 1e-3 * gaps[0]

    def test_long_run_mean_matches_fixed_point(self):
        spec = SyntheticSpec(n_days=4000, contraction=0.5, noise_scale=2.0)
        curves = far1_curves(spec, np.random.default_rng(3))
        mean = spec.mean()
        # stationary per-point standard error: sigma / sqrt(1 - c^2), and
        # consecutive days are correlated, so allow a generous Monte Carlo band
        se = 2.0 / np.sqrt(1 - 0.25) / np.sqrt(4000 * (1 - 0.5) / (1 + 0.5))
        assert np.max(np.abs(curves.mean(axis=0) - mean)) < 6 * se

    def test_heteroscedastic_profile_reproduced(self):
        profile = np.full(24, 2.0)
        profile[12] = 10.0
        spec = SyntheticSpec(n_days=2000, contraction=0.4, noise_profile=profile)
        curves = far1_curves(spec, np.random.default_rng(4))
        mean = spec.mean()
        resid = curves[1:] - (mean + 0.4 * (curves[:-1] - mean))
        ratio = resid.std(axis=0) / profile
        assert np.all(np.abs(ratio - 1.0) < 0.05)

    def test_seed_determinism(self):
        spec = SyntheticSpec(n_days=30)
        a = far1_curves(spec, np.random.default_rng(9))
        b = far1_curves(spec, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)


class TestHourlyEmission:
    def test_emits_ingest_schema_days(self):
        spec = SyntheticSpec(n_days=5)
        records = synthetic_far1(spec, np.random.default_rng(0))
        assert len(records) == 5 * 24
        hours = [r.timestamp.hour for r in records[:24]]
        assert hours == list(range(24))
        assert all(np.isfinite(r.price) for r in records)
        # daily covariates constant within each day
        first_day = records[:24]
        assert len({r.max_temp for r in first_day}) == 1
        assert len({r.wind for r in first_day}) == 1
