import numpy as np
import pytest

from curveband.curves import Curve, Grid


@pytest.fixture
def grid24():
    return Grid(24)


@pytest.fixture
def rng():
    return np.random.default_rng(20120402)


def make_curve(grid: Grid, values) -> Curve:
    return Curve(grid, np.asarray(values, dtype=float))
