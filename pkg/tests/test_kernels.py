import numpy as np
import pytest

from curveband import _kernels as K
from curveband.errors import ParameterError


@pytest.fixture(params=K.available_backends())
def backend(request):
    K.set_backend(request.param)
    yield request.param
    K.set_backend(None)


@pytest.fixture
def both_backends():
    yield
    K.set_backend(None)


def test_backend_selection_env(monkeypatch, both_backends):
    monkeypatch.setenv("CURVEBAND_BACKEND", "numpy")
    K.set_backend(None)
    assert K.active_backend() == "numpy"
    monkeypatch.setenv("CURVEBAND_BACKEND", "bogus")
    with pytest.raises(ParameterError):
        K.active_backend()


def test_set_backend_rejects_unknown():
    with pytest.raises(ParameterError):
        K.set_backend("fortran")


def test_pairwise_dists(backend, rng):
    feats = rng.standard_normal((40, 5))
    d = K.pairwise_dists(feats)
    assert d.shape == (40, 40)
    i, j = 3, 17
    assert d[i, j] == pytest.approx(np.linalg.norm(feats[i] - feats[j]), rel=1e-12)
    np.testing.assert_allclose(d, d.T, atol=1e-12)
    assert np.all(np.diag(d) == 0.0)


def test_query_dists(backend, rng):
    feats = rng.standard_normal((30, 4))
    q = rng.standard_normal(4)
    d = K.query_dists(feats, q)
    expected = np.linalg.norm(feats - q, axis=1)
    np.testing.assert_allclose(d, expected, rtol=1e-12)


def test_tukey_depths_exact_across_backends(rng):
    proj = rng.standard_normal((20, 50))
    results = {}
    for name in K.available_backends():
        K.set_backend(name)
        results[name] = K.tukey_depths(proj)
    K.set_backend(None)
    if len(results) == 2:
        np.testing.assert_array_equal(results["numba"], results["numpy"])


def test_loo_cv_scores_agree_across_backends(rng):
    feats = rng.standard_normal((35, 4))
    resp = rng.standard_normal((35, 24))
    results = {}
    for name in K.available_backends():
        K.set_backend(name)
        dists = K.pairwise_dists(feats)
        results[name] = K.loo_cv_scores(
            dists, resp, np.array([2, 4, 8]), np.ones(35), 1.0
        )
    K.set_backend(None)
    if len(results) == 2:
        np.testing.assert_allclose(results["numba"], results["numpy"], rtol=1e-10)


def test_loo_cv_degenerate_k_scores_inf(backend):
    # three identical rows: the 1-nearest distance is zero everywhere
    feats = np.zeros((3, 2))
    dists = K.pairwise_dists(feats)
    scores = K.loo_cv_scores(dists, np.ones((3, 4)), np.array([1, 2]), np.ones(3), 1.0)
    assert np.all(np.isinf(scores))


def test_resample_weighted_sums(backend, rng):
    resid = rng.standard_normal((25, 24))
    idx = rng.integers(0, 25, size=(40, 25))
    w = rng.random(25)
    out = K.resample_weighted_sums(w, resid, idx)
    for j in (0, 17, 39):
        np.testing.assert_allclose(out[j], w @ resid[idx[j]], atol=1e-12)
