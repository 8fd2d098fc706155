"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

The backend is selected by the ``CURVEBAND_BACKEND`` environment variable:
``numba`` (default when numba imports) or ``numpy``.  ``set_backend`` can
override the choice programmatically, e.g. from tests or benchmarks.

Both paths implement the same arithmetic; counting kernels (Tukey depth)
agree exactly, floating-point reductions agree to summation-order rounding.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ParameterError

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False

_ENV_VAR = "CURVEBAND_BACKEND"
_backend_override: str | None = None


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def set_backend(name: str | None) -> None:
    """Force a backend ('numba' or 'numpy'); ``None`` restores env selection."""
    global _backend_override
    if name is not None and name not in ("numba", "numpy"):
        raise ParameterError(f"unknown kernel backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ParameterError("numba backend requested but numba is not importable")
    _backend_override = name


def active_backend() -> str:
    if _backend_override is not None:
        return _backend_override
    env = os.environ.get(_ENV_VAR, "").strip().lower()
    if env in ("numba", "numpy"):
        if env == "numba" and not _HAVE_NUMBA:
            raise ParameterError(
                f"{_ENV_VAR}=numba requested but numba is not importable"
            )
        return env
    if env:
        raise ParameterError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {env!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations


def _pairwise_dists_numpy(feats: np.ndarray) -> np.ndarray:
    diff = feats[:, None, :] - feats[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _query_dists_numpy(feats: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = feats - query[None, :]
    return np.sqrt(np.einsum("ik,ik->i", diff, diff))


def _tukey_depths_numpy(proj: np.ndarray) -> np.ndarray:
    # proj: (n_projections, n) matrix of projected sample values
    n = proj.shape[1]
    depths = np.full(n, 1.0)
    for row in proj:
        srt = np.sort(row)
        n_le = np.searchsorted(srt, row, side="right")
        n_ge = n - np.searchsorted(srt, row, side="left")
        depths = np.minimum(depths, np.minimum(n_le, n_ge) / n)
    return depths


def _loo_cv_scores_numpy(
    dists: np.ndarray,
    resp: np.ndarray,
    k_grid: np.ndarray,
    obs_weights: np.ndarray,
    spacing: float,
) -> np.ndarray:
    n = dists.shape[0]
    masked = dists + np.diag(np.full(n, np.inf))
    order = np.sort(masked, axis=1)  # non-self distances, ascending
    scores = np.empty(len(k_grid))
    for m, k in enumerate(k_grid):
        h = order[:, k - 1] * (1.0 + 1e-9)
        if np.any(h <= 0.0):
            # a left-out point whose k nearest neighbours are duplicates of it
            scores[m] = np.inf
            continue
        u = dists / h[:, None]
        kv = np.where((u > 0.0) & (u < 1.0), 0.75 * (1.0 - u * u), 0.0)
        ksum = kv.sum(axis=1)  # > 0: the k-th neighbour is strictly inside
        pred = (kv @ resp) / ksum[:, None]
        err = spacing * ((resp - pred) ** 2).sum(axis=1)
        scores[m] = float((obs_weights * err).sum())
    return scores


def _resample_weighted_sums_numpy(
    weights: np.ndarray, resid: np.ndarray, idx: np.ndarray
) -> np.ndarray:
    out = np.empty((idx.shape[0], resid.shape[1]))
    for j in range(idx.shape[0]):
        out[j] = weights @ resid[idx[j]]
    return out


_NUMPY_IMPLS = {
    "pairwise_dists": _pairwise_dists_numpy,
    "query_dists": _query_dists_numpy,
    "tukey_depths": _tukey_depths_numpy,
    "loo_cv_scores": _loo_cv_scores_numpy,
    "resample_weighted_sums": _resample_weighted_sums_numpy,
}


# ---------------------------------------------------------------------------
# numba implementations

if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _pairwise_dists_numba(feats):
        n, m = feats.shape
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for c in range(m):
                    d = feats[i, c] - feats[j, c]
                    acc += d * d
                r = np.sqrt(acc)
                out[i, j] = r
                out[j, i] = r
        return out

    @numba.njit(cache=True)
    def _query_dists_numba(feats, query):
        n, m = feats.shape
        out = np.empty(n)
        for i in range(n):
            acc = 0.0
            for c in range(m):
                d = feats[i, c] - query[c]
                acc += d * d
            out[i] = np.sqrt(acc)
        return out

    @numba.njit(cache=True)
    def _tukey_depths_numba(proj):
        n_proj, n = proj.shape
        depths = np.full(n, 1.0)
        for r in range(n_proj):
            for i in range(n):
                v = proj[r, i]
                n_le = 0
                n_ge = 0
                for j in range(n):
                    if proj[r, j] <= v:
                        n_le += 1
                    if proj[r, j] >= v:
                        n_ge += 1
                d = min(n_le, n_ge) / n
                if d < depths[i]:
                    depths[i] = d
        return depths

    @numba.njit(cache=True)
    def _loo_cv_scores_numba(dists, resp, k_grid, obs_weights, spacing):
        n = dists.shape[0]
        tau = resp.shape[1]
        order = np.empty((n, n - 1))
        row = np.empty(n - 1)
        for i in range(n):
            c = 0
            for j in range(n):
                if j != i:
                    row[c] = dists[i, j]
                    c += 1
            order[i] = np.sort(row)
        scores = np.empty(k_grid.shape[0])
        pred = np.empty(tau)
        for m in range(k_grid.shape[0]):
            k = k_grid[m]
            total = 0.0
            ok = True
            for i in range(n):
                h = order[i, k - 1] * (1.0 + 1e-9)
                if h <= 0.0:
                    ok = False
                    break
                ksum = 0.0
                for t in range(tau):
                    pred[t] = 0.0
                for j in range(n):
                    if j == i:
                        continue
                    u = dists[i, j] / h
                    if 0.0 < u < 1.0:
                        kv = 0.75 * (1.0 - u * u)
                        ksum += kv
                        for t in range(tau):
                            pred[t] += kv * resp[j, t]
                err = 0.0
                for t in range(tau):
                    d = resp[i, t] - pred[t] / ksum
                    err += d * d
                total += obs_weights[i] * err * spacing
            scores[m] = total if ok else np.inf
        return scores

    @numba.njit(cache=True)
    def _resample_weighted_sums_numba(weights, resid, idx):
        n_rep, n = idx.shape
        tau = resid.shape[1]
        out = np.zeros((n_rep, tau))
        for j in range(n_rep):
            for i in range(n):
                w = weights[i]
                r = idx[j, i]
                for t in range(tau):
                    out[j, t] += w * resid[r, t]
        return out

    _NUMBA_IMPLS = {
        "pairwise_dists": _pairwise_dists_numba,
        "query_dists": _query_dists_numba,
        "tukey_depths": _tukey_depths_numba,
        "loo_cv_scores": _loo_cv_scores_numba,
        "resample_weighted_sums": _resample_weighted_sums_numba,
    }
else:  # pragma: no cover
    _NUMBA_IMPLS = {}


def _impl(name: str):
    if active_backend() == "numba":
        return _NUMBA_IMPLS[name]
    return _NUMPY_IMPLS[name]


def _c64(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


# ---------------------------------------------------------------------------
# public wrappers


def pairwise_dists(feats: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between feature rows."""
    return _impl("pairwise_dists")(_c64(feats))


def query_dists(feats: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Euclidean distances from one query feature row to every sample row."""
    return _impl("query_dists")(_c64(feats), _c64(query))


def tukey_depths(proj: np.ndarray) -> np.ndarray:
    """Min-over-projections univariate Tukey depth for projected samples.

    ``proj[r, i]`` is sample i projected on direction r; both tail counts are
    inclusive, so duplicated values share depth.
    """
    return _impl("tukey_depths")(_c64(proj))


def loo_cv_scores(
    dists: np.ndarray,
    resp: np.ndarray,
    k_grid: np.ndarray,
    obs_weights: np.ndarray,
    spacing: float,
) -> np.ndarray:
    """Leave-one-out squared-error score per candidate neighbour count.

    For each left-out row the bandwidth is the k-th smallest non-self
    distance (inflated by 1e-9 so the k-th neighbour sits strictly inside the
    kernel support).  A candidate k whose bandwidth degenerates to zero for
    some row scores ``inf``.
    """
    return _impl("loo_cv_scores")(
        _c64(dists),
        _c64(resp),
        np.ascontiguousarray(k_grid, dtype=np.int64),
        _c64(obs_weights),
        float(spacing),
    )


def resample_weighted_sums(
    weights: np.ndarray, resid: np.ndarray, idx: np.ndarray
) -> np.ndarray:
    """Row ``j`` of the result is ``weights @ resid[idx[j]]``."""
    return _impl("resample_weighted_sums")(
        _c64(weights), _c64(resid), np.ascontiguousarray(idx, dtype=np.int64)
    )
