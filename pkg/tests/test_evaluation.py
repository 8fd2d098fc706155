import numpy as np
import pytest

from curveband.bootstrap import BallRegion, BandRegion
from curveband.curves import Curve, Grid, NormTag, l1_distance
from curveband.errors import ParameterError, UnsupportedRegionError
from curveband.evaluation import (
    RegionOutcome,
    awidth,
    contains,
    fws,
    make_report,
    metrics_table,
    pointwise_contains,
    winkler_pointwise,
)


def band(grid, lower, upper, center=None):
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    return BandRegion(
        lower=Curve(grid, lo),
        upper=Curve(grid, up),
        center=Curve(grid, 0.5 * (lo + up) if center is None else center),
    )


def random_band(rng, grid, width_scale=1.0):
    center = rng.standard_normal(grid.tau)
    half = rng.uniform(0.2, 1.0, grid.tau) * width_scale
    return band(grid, center - half, center + half)


class TestContains:
    def test_center_is_inside(self, grid24, rng):
        b = random_band(rng, grid24)
        assert contains(b, b.center)
        assert pointwise_contains(b, b.center).all()

    def test_single_point_excursion(self, grid24, rng):
        b = random_band(rng, grid24)
        values = b.center.values.copy()
        values[7] = b.upper.values[7] + 0.5
        truth = Curve(grid24, values)
        assert not contains(b, truth)
        assert pointwise_contains(b, truth).sum() == 23
        assert pointwise_contains(b, truth).mean() == pytest.approx(23 / 24)

    def test_matches_direct_recheck(self, grid24, rng):
        for _ in range(50):
            b = random_band(rng, grid24)
            truth = Curve(grid24, rng.standard_normal(24) * 1.5)
            expected = [
                bool(b.lower.values[t] <= truth.values[t] <= b.upper.values[t])
                for t in range(24)
            ]
            np.testing.assert_array_equal(pointwise_contains(b, truth), expected)
            assert contains(b, truth) == all(expected)

    def test_ball_membership_by_norm(self, grid24):
        center = Curve(grid24, np.zeros(24))
        ball = BallRegion(center=center, radius=2.0, norm=NormTag.L2)
        inside = Curve(grid24, np.full(24, 0.1))
        outside = Curve(grid24, np.full(24, 1.0))
        assert contains(ball, inside)
        assert not contains(ball, outside)
        with pytest.raises(UnsupportedRegionError):
            pointwise_contains(ball, inside)

    def test_linf_ball_pointwise(self, grid24):
        center = Curve(grid24, np.zeros(24))
        ball = BallRegion(center=center, radius=1.0, norm=NormTag.LINF)
        truth = Curve(grid24, np.linspace(-2, 2, 24))
        pw = pointwise_contains(ball, truth)
        np.testing.assert_array_equal(pw, np.abs(truth.values) <= 1.0)


class TestAwidth:
    def test_constant_width(self, grid24):
        b = band(grid24, np.zeros(24), np.full(24, 3.0))
        assert awidth([b]) == pytest.approx(3.0)

    def test_two_band_average(self, grid24):
        b1 = band(grid24, np.zeros(24), np.full(24, 2.0))
        b2 = band(grid24, np.zeros(24), np.full(24, 4.0))
        assert awidth([b1, b2]) == pytest.approx(3.0)

    def test_matches_double_loop_oracle(self, grid24, rng):
        bands = [random_band(rng, grid24) for _ in range(10)]
        total = 0.0
        for b in bands:
            s = 0.0
            for t in range(24):
                s += b.upper.values[t] - b.lower.values[t]
            total += s / 24
        assert awidth(bands) == pytest.approx(total / 10, abs=1e-12)

    def test_rejects_non_band(self, grid24):
        ball = BallRegion(
            center=Curve(grid24, np.zeros(24)), radius=1.0, norm=NormTag.L1
        )
        with pytest.raises(UnsupportedRegionError):
            awidth([ball])


class TestWinklerPointwise:
    def test_inside_is_plain_width(self):
        assert winkler_pointwise(0.0, 1.0, 0.5, 0.2) == pytest.approx(1.0)
        assert winkler_pointwise(0.0, 1.0, 0.0, 0.2) == pytest.approx(1.0)
        assert winkler_pointwise(0.0, 1.0, 1.0, 0.2) == pytest.approx(1.0)

    def test_above_penalty(self):
        assert winkler_pointwise(0.0, 1.0, 2.0, 0.2) == pytest.approx(11.0)

    def test_matches_formula_oracle(self, rng):
        for _ in range(200):
            l = float(rng.normal())
            u = l + float(rng.uniform(0.1, 2.0))
            z = float(rng.normal(scale=2.0))
            alpha = float(rng.uniform(0.02, 0.5))
            expected = (u - l)
            expected += (2 / alpha) * (l - z) * (z < l)
            expected += (2 / alpha) * (z - u) * (z > u)
            assert winkler_pointwise(l, u, z, alpha) == pytest.approx(expected, rel=1e-12)

    def test_continuity_and_slopes(self):
        l, u, alpha = -1.0, 1.0, 0.2
        eps = 1e-9
        assert winkler_pointwise(l, u, l - eps, alpha) == pytest.approx(
            winkler_pointwise(l, u, l, alpha), abs=1e-7
        )
        below = [winkler_pointwise(l, u, z, alpha) for z in (-3.0, -2.0)]
        assert below[0] - below[1] == pytest.approx((2 / alpha) * 1.0)
        inside = [winkler_pointwise(l, u, z, alpha) for z in (-0.5, 0.5)]
        assert inside[0] == inside[1]

    def test_order_validation(self):
        with pytest.raises(ParameterError):
            winkler_pointwise(1.0, 0.0, 0.5, 0.2)


class TestFws:
    def test_inside_equals_limit_distance(self, grid24, rng):
        b = random_band(rng, grid24)
        outcome = RegionOutcome(truth=b.center, region=b, alpha=0.2)
        assert fws(outcome) == pytest.approx(l1_distance(b.lower, b.upper), rel=1e-12)

    def test_fully_below_analytic(self, grid24):
        lower = np.zeros(24)
        upper = np.full(24, 2.0)
        b = band(grid24, lower, upper)
        c = 0.5
        truth = Curve(grid24, lower - c)
        outcome = RegionOutcome(truth=truth, region=b, alpha=0.2)
        expected = 2.0 * 24 + (2 / 0.2) * min(c * 24, (2.0 + c) * 24)
        assert fws(outcome) == pytest.approx(expected, rel=1e-12)

    def test_matches_formula_oracle(self, grid24, rng):
        for _ in range(100):
            b = random_band(rng, grid24)
            truth = Curve(grid24, rng.standard_normal(24) * 2.0)
            alpha = float(rng.uniform(0.02, 0.5))
            outcome = RegionOutcome(truth=truth, region=b, alpha=alpha)
            delta_lu = l1_distance(b.lower, b.upper)
            outside = bool(
                np.any(truth.values < b.lower.values)
                or np.any(truth.values > b.upper.values)
            )
            expected = delta_lu
            if outside:
                expected += (2 / alpha) * min(
                    l1_distance(b.lower, truth), l1_distance(b.upper, truth)
                )
            assert fws(outcome) == pytest.approx(expected, abs=1e-10)

    def test_lower_bound_with_equality_iff_contained(self, grid24, rng):
        for _ in range(100):
            b = random_band(rng, grid24)
            truth = Curve(grid24, rng.standard_normal(24) * 1.5)
            outcome = RegionOutcome(truth=truth, region=b, alpha=0.1)
            score = fws(outcome)
            floor = l1_distance(b.lower, b.upper)
            assert score >= floor - 1e-12
            assert (score == pytest.approx(floor)) == contains(b, truth)

    def test_metrics_shift_invariant(self, grid24, rng):
        b = random_band(rng, grid24)
        truth = Curve(grid24, rng.standard_normal(24))
        shift = rng.standard_normal(24)
        shifted_band = band(
            grid24, b.lower.values + shift, b.upper.values + shift
        )
        shifted_truth = Curve(grid24, truth.values + shift)
        o1 = RegionOutcome(truth=truth, region=b, alpha=0.2)
        o2 = RegionOutcome(truth=shifted_truth, region=shifted_band, alpha=0.2)
        assert contains(b, truth) == contains(shifted_band, shifted_truth)
        np.testing.assert_array_equal(
            pointwise_contains(b, truth), pointwise_contains(shifted_band, shifted_truth)
        )
        assert fws(o1) == pytest.approx(fws(o2), rel=1e-9)
        assert awidth([b]) == pytest.approx(awidth([shifted_band]), rel=1e-9)


class TestReports:
    def outcomes(self, rng, grid, j=20):
        out = []
        for _ in range(j):
            b = random_band(rng, grid)
            truth = Curve(grid, rng.standard_normal(grid.tau))
            out.append(RegionOutcome(truth=truth, region=b, alpha=0.2))
        return out

    def test_fcov_never_exceeds_pcov(self, grid24, rng):
        for _ in range(50):
            outs = self.outcomes(rng, grid24, j=10)
            report = make_report(outs)
            assert report.fcov <= report.pcov + 1e-9

    def test_partial_coverage_strict_inequality(self, grid24, rng):
        outs = self.outcomes(rng, grid24, j=30)
        partial = any(
            0 < pointwise_contains(o.region, o.truth).sum() < 24 for o in outs
        )
        report = make_report(outs)
        if partial:
            assert report.fcov < report.pcov

    def test_ball_only_report(self, grid24, rng):
        ball = BallRegion(
            center=Curve(grid24, np.zeros(24)), radius=3.0, norm=NormTag.L2
        )
        outs = [
            RegionOutcome(
                truth=Curve(grid24, rng.standard_normal(24) * 0.2),
                region=ball,
                alpha=0.2,
            )
            for _ in range(5)
        ]
        with pytest.warns(UserWarning, match="excluded"):
            report = make_report(outs)
        assert report.pcov is None and report.awidth is None and report.fws is None
        assert report.j_count == 5

    def test_metrics_table_schema(self):
        text = metrics_table(
            [
                {
                    "day_type": "weekday",
                    "method": "lambda",
                    "model": "fnp",
                    "alpha": 0.05,
                    "FCov": 93.75,
                    "PCov": 98.8,
                    "AWidth": 8360.0,
                    "FWS": 13433.3,
                }
            ]
        )
        lines = text.strip().split("\n")
        assert lines[0] == "day_type,method,model,alpha,FCov,PCov,AWidth,FWS"
        assert lines[1].startswith("weekday,lambda,fnp,0.05,93.75,")
