import numpy as np
import pytest

from curveband.curves import Curve, Grid, NormTag, l1_distance, norm_lp
from curveband.errors import DataError, GridMismatchError, ParameterError

ALL_NORMS = (NormTag.L1, NormTag.L2, NormTag.LINF)


def brute_l1_distance(x, y, spacing):
    # independent double-loop rectangle-rule quadrature
    total = 0.0
    for a, b in zip(list(x), list(y)):
        total += abs(a - b) * spacing
    return total


class TestGridAndCurve:
    def test_grid_validation(self):
        with pytest.raises(ParameterError):
            Grid(1)
        with pytest.raises(ParameterError):
            Grid(24, spacing=0.0)
        with pytest.raises(ParameterError):
            Grid(24, spacing=-1.0)

    def test_curve_shape_and_finiteness(self, grid24):
        with pytest.raises(ParameterError):
            Curve(grid24, np.zeros(23))
        with pytest.raises(DataError):
            Curve(grid24, np.full(24, np.nan))

    def test_curve_values_immutable(self, grid24):
        c = Curve(grid24, np.arange(24.0))
        with pytest.raises(ValueError):
            c.values[0] = 1.0


class TestNorms:
    def test_zero_curve(self, grid24):
        zero = Curve(grid24, np.zeros(24))
        for p in ALL_NORMS:
            assert norm_lp(zero, p) == 0.0

    def test_constant_curve_analytic(self, grid24):
        one = Curve(grid24, np.ones(24))
        assert norm_lp(one, NormTag.L1) == pytest.approx(24.0)
        assert norm_lp(one, NormTag.L2) == pytest.approx(np.sqrt(24.0))
        assert norm_lp(one, NormTag.LINF) == 1.0

    def test_ramp_analytic(self):
        g = Grid(4)
        ramp = Curve(g, np.array([1.0, 2.0, 3.0, 4.0]))
        assert norm_lp(ramp, NormTag.L1) == pytest.approx(10.0)
        assert norm_lp(ramp, NormTag.LINF) == 4.0

    @pytest.mark.parametrize("p", ALL_NORMS)
    def test_norm_axioms(self, rng, p):
        g = Grid(24, spacing=0.5)
        for _ in range(50):
            x = Curve(g, rng.standard_normal(24))
            y = Curve(g, rng.standard_normal(24))
            c = float(rng.standard_normal())
            assert norm_lp(x, p) >= 0.0
            scaled = Curve(g, c * x.values)
            assert norm_lp(scaled, p) == pytest.approx(abs(c) * norm_lp(x, p), rel=1e-12)
            s = Curve(g, x.values + y.values)
            assert norm_lp(s, p) <= norm_lp(x, p) + norm_lp(y, p) + 1e-12

    def test_discrete_norm_orderings(self, rng):
        # |x|_1 >= spacing * |x|_inf  and  |x|_2^2 <= |x|_1 * |x|_inf
        g = Grid(24, spacing=0.5)
        for _ in range(100):
            x = Curve(g, rng.standard_normal(24) * rng.uniform(0.1, 10))
            n1 = norm_lp(x, NormTag.L1)
            n2 = norm_lp(x, NormTag.L2)
            ninf = norm_lp(x, NormTag.LINF)
            assert n1 >= g.spacing * ninf - 1e-12
            assert n2 * n2 <= n1 * ninf + 1e-9


class TestL1Distance:
    def test_identity(self, grid24, rng):
        x = Curve(grid24, rng.standard_normal(24))
        assert l1_distance(x, x) == 0.0

    def test_constant_offset(self, grid24):
        x = Curve(grid24, np.full(24, 2.0))
        y = Curve(grid24, np.full(24, 1.0))
        assert l1_distance(x, y) == pytest.approx(24.0)

    def test_matches_bruteforce_quadrature(self, rng):
        g = Grid(24, spacing=0.25)
        for _ in range(30):
            x = Curve(g, rng.standard_normal(24) * 5)
            y = Curve(g, rng.standard_normal(24) * 5)
            expected = brute_l1_distance(x.values, y.values, g.spacing)
            assert l1_distance(x, y) == pytest.approx(expected, abs=1e-12)

    def test_metric_axioms(self, grid24, rng):
        for _ in range(30):
            x = Curve(grid24, rng.standard_normal(24))
            y = Curve(grid24, rng.standard_normal(24))
            z = Curve(grid24, rng.standard_normal(24))
            assert l1_distance(x, y) == pytest.approx(l1_distance(y, x), rel=1e-14)
            assert l1_distance(x, z) <= l1_distance(x, y) + l1_distance(y, z) + 1e-10
        same = Curve(grid24, np.arange(24.0))
        assert l1_distance(same, Curve(grid24, np.arange(24.0))) == 0.0

    def test_grid_mismatch(self):
        x = Curve(Grid(24), np.zeros(24))
        y = Curve(Grid(24, spacing=2.0), np.zeros(24))
        with pytest.raises(GridMismatchError):
            l1_distance(x, y)
