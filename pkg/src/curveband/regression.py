"""One-step-ahead curve predictors.

Two estimator families over a sample of (lagged curve, scalar covariates,
response curve) triples:

* ``fnp``  -- kernel-weighted average of response curves, with weights from
  an Epanechnikov kernel on semimetric distances between lagged curves;
* ``sfpl`` -- partial-linear extension: a least-squares linear term in the
  scalar covariates (one coefficient curve per covariate) estimated on
  smoother-residualized data, plus the kernel average of the partial
  residuals.

Bandwidths are k-nearest-neighbour: the k-th smallest distance, inflated by
a factor (1 + 1e-9) so exactly k points sit strictly inside the kernel
support.  The kernel vanishes at distance zero (open support), so self-pairs
receive no weight and the estimators never interpolate themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .curves import Curve, Grid
from .errors import (
    DataError,
    DegenerateBandwidthError,
    EmptyNeighborhoodError,
    ParameterError,
    SingularDesignError,
)
from .semimetrics import SemimetricModel, semimetric_features

FNP = "fnp"
SFPL = "sfpl"

# inflation applied to the k-th neighbour distance so it falls inside the
# open kernel support
KNN_INFLATION = 1.0 + 1e-9


@dataclass(frozen=True)
class RegressionSample:
    """Training triples (lagged curve, covariate row, response curve).

    ``indices`` are the original day offsets of the responses, strictly
    increasing.  ``covariates`` may have zero columns (no scalar covariates).
    """

    grid: Grid
    predictors: np.ndarray  # (n, tau)
    covariates: np.ndarray  # (n, p)
    responses: np.ndarray  # (n, tau)
    indices: np.ndarray  # (n,)

    def __post_init__(self) -> None:
        preds = np.asarray(self.predictors, dtype=np.float64)
        covs = np.asarray(self.covariates, dtype=np.float64)
        resps = np.asarray(self.responses, dtype=np.float64)
        idx = np.asarray(self.indices, dtype=np.int64)
        n = preds.shape[0]
        if n == 0:
            raise ParameterError("regression sample is empty")
        if preds.shape != (n, self.grid.tau) or resps.shape != (n, self.grid.tau):
            raise ParameterError("predictor/response shapes do not match the grid")
        if covs.ndim != 2 or covs.shape[0] != n:
            raise ParameterError("covariates must be an (n, p) matrix")
        if idx.shape != (n,) or (n > 1 and not np.all(np.diff(idx) > 0)):
            raise ParameterError("indices must be strictly increasing, one per pair")
        for name, a in (("predictors", preds), ("covariates", covs), ("responses", resps)):
            if not np.all(np.isfinite(a)):
                raise DataError(f"{name} contain non-finite values")
        object.__setattr__(self, "predictors", preds)
        object.__setattr__(self, "covariates", covs)
        object.__setattr__(self, "responses", resps)
        object.__setattr__(self, "indices", idx)

    @property
    def n(self) -> int:
        return self.predictors.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]


@dataclass(frozen=True)
class ModelSpec:
    """Estimator family plus its tuning state.

    ``k`` is the neighbour count behind the prediction bandwidth h;
    residual-generation uses the larger, oversmoothed bandwidth from
    ``ceil(k_boot_factor * k)`` neighbours.  The kernel is fixed to the
    Epanechnikov kernel.  ``cond_max`` bounds the accepted condition number
    of the partial-linear normal equations; ``ridge_fallback`` switches the
    singular-design error for a flagged ridge solve.
    """

    family: str
    semimetric: SemimetricModel
    k: int
    k_boot_factor: float = 2.0
    cond_max: float = 1e12
    ridge_fallback: bool = False

    def __post_init__(self) -> None:
        if self.family not in (FNP, SFPL):
            raise ParameterError(f"unknown model family {self.family!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if not self.k_boot_factor > 1.0:
            raise ParameterError(
                f"k_boot_factor must exceed 1, got {self.k_boot_factor!r}"
            )

    def k_boot(self, n: int) -> int:
        """Oversmoothing neighbour count, capped at the sample size."""
        return min(n, math.ceil(self.k_boot_factor * self.k))


def epanechnikov(u):
    """Epanechnikov kernel 0.75*(1-u^2) on the open interval (0, 1).

    Accepts scalars or arrays; zero outside the support, including at u = 0.
    """
    u = np.asarray(u, dtype=np.float64)
    out = np.where((u > 0.0) & (u < 1.0), 0.75 * (1.0 - u * u), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def _query_feature(d: SemimetricModel, query: Curve) -> np.ndarray:
    if query.grid != d.grid:
        raise ParameterError(f"query on {query.grid} but semimetric on {d.grid}")
    return semimetric_features(d, query.values)[0]


def _sample_features(d: SemimetricModel, sample: RegressionSample) -> np.ndarray:
    if sample.grid != d.grid:
        raise ParameterError(f"sample on {sample.grid} but semimetric on {d.grid}")
    return semimetric_features(d, sample.predictors)


def _knn_radius(dists: np.ndarray, k: int) -> float:
    kth = float(np.partition(dists, k - 1)[k - 1])
    if kth <= 0.0:
        raise DegenerateBandwidthError(
            "k-th nearest distance is zero (duplicate curves in the sample)"
        )
    return kth * KNN_INFLATION


def knn_bandwidth(
    query: Curve, sample: RegressionSample, k: int, d: SemimetricModel
) -> float:
    """k-nearest-neighbour bandwidth of a query among the sample predictors."""
    if not 1 <= k <= sample.n:
        raise ParameterError(f"k={k} outside 1..{sample.n}")
    dists = _kernels.query_dists(_sample_features(d, sample), _query_feature(d, query))
    return _knn_radius(dists, k)


def _weights_from_dists(dists: np.ndarray, h: float) -> np.ndarray:
    kv = epanechnikov(dists / h)
    total = kv.sum()
    if total <= 0.0:
        raise EmptyNeighborhoodError(
            f"no training curve within bandwidth {h:g} received positive weight"
        )
    return kv / total


def nw_weights(
    query: Curve, sample: RegressionSample, h: float, d: SemimetricModel
) -> np.ndarray:
    """Normalized kernel weights of the sample pairs for one query curve."""
    if not h > 0:
        raise ParameterError(f"bandwidth must be positive, got {h!r}")
    dists = _kernels.query_dists(_sample_features(d, sample), _query_feature(d, query))
    return _weights_from_dists(dists, h)


def fnp_predict(query: Curve, sample: RegressionSample, spec: ModelSpec) -> Curve:
    """Kernel-average prediction of the next curve given the lagged query curve."""
    if spec.family != FNP:
        raise ParameterError(f"fnp_predict called with family {spec.family!r}")
    h = knn_bandwidth(query, sample, spec.k, spec.semimetric)
    w = nw_weights(query, sample, h, spec.semimetric)
    return Curve(sample.grid, w @ sample.responses)


# ---------------------------------------------------------------------------
# partial-linear estimator


@dataclass(frozen=True)
class SfplFit:
    """Fitted partial-linear model: one coefficient curve per covariate.

    ``beta`` is (p, tau).  ``ridge_used`` flags that the normal equations
    were stabilised by the documented ridge fallback.  Covariate columns that
    are identically zero are inert: excluded from the solve, their beta rows
    are zero.
    """

    beta: np.ndarray
    spec: ModelSpec
    sample: RegressionSample
    ridge_used: bool = False

    def __post_init__(self) -> None:
        if self.beta.shape != (self.sample.p, self.sample.grid.tau):
            raise ParameterError("beta must be (p, tau)")
        if not np.all(np.isfinite(self.beta)):
            raise DataError("beta contains non-finite values")


def _row_smoother(dists: np.ndarray, k: int) -> np.ndarray:
    """Kernel-weight matrix whose row i smooths at training point i.

    Each row's bandwidth is the k-th smallest non-self distance on that row;
    the kernel's open support keeps the diagonal at zero.
    """
    n = dists.shape[0]
    k = min(k, n - 1)
    if k < 1:
        raise ParameterError("need at least two pairs to build a smoother matrix")
    masked = dists + np.diag(np.full(n, np.inf))
    kth = np.partition(masked, k - 1, axis=1)[:, k - 1]
    if np.any(kth <= 0.0):
        bad = int(np.argmax(kth <= 0.0))
        raise DegenerateBandwidthError(
            f"training pair {bad} has duplicate curves among its {k} nearest"
        )
    h = kth * KNN_INFLATION
    u = dists / h[:, None]
    kv = np.where((u > 0.0) & (u < 1.0), 0.75 * (1.0 - u * u), 0.0)
    return kv / kv.sum(axis=1)[:, None]


def _solve_partial_linear(
    smoother: np.ndarray, covariates: np.ndarray, spec: ModelSpec
) -> tuple[np.ndarray, bool]:
    """Projector turning responses into coefficient curves: beta = proj @ Z.

    Identically-zero covariate columns contribute nothing and are dropped
    from the normal equations; their projector rows are zero.
    """
    n, p = covariates.shape
    active = np.flatnonzero(np.max(np.abs(covariates), axis=0) > 0.0)
    proj = np.zeros((p, n))
    if active.size == 0:
        return proj, False
    x_act = covariates[:, active]
    x_tilde = x_act - smoother @ x_act
    # a column the smoother reproduces (e.g. a constant) leaves no signal to
    # regress on; ridge cannot identify it either
    col_scale = np.linalg.norm(x_act, axis=0)
    tilde_scale = np.linalg.norm(x_tilde, axis=0)
    if np.any(tilde_scale <= 1e-8 * col_scale):
        bad = int(active[np.argmax(tilde_scale <= 1e-8 * col_scale)])
        raise SingularDesignError(
            f"covariate column {bad} is absorbed by the smoother "
            "(constant or smoother-reproducible); its effect is unidentifiable"
        )
    gram = x_tilde.T @ x_tilde
    ridge_used = False
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > spec.cond_max:
        if not spec.ridge_fallback:
            raise SingularDesignError(
                f"partial-linear design is ill-conditioned (cond={cond:.3g}); "
                "covariates may be collinear"
            )
        gram = gram + 1e-8 * np.trace(gram) * np.eye(gram.shape[0])
        ridge_used = True
    rhs = x_tilde.T @ (np.eye(n) - smoother)
    proj[active] = np.linalg.solve(gram, rhs)
    return proj, ridge_used


def sfpl_fit(sample: RegressionSample, spec: ModelSpec) -> SfplFit:
    """Least-squares + kernel-smoother fit of the partial-linear model."""
    if spec.family != SFPL:
        raise ParameterError(f"sfpl_fit called with family {spec.family!r}")
    if sample.p < 1:
        raise ParameterError("partial-linear fit needs at least one covariate")
    if spec.k > sample.n:
        raise ParameterError(f"k={spec.k} exceeds sample size {sample.n}")
    feats = _sample_features(spec.semimetric, sample)
    dists = _kernels.pairwise_dists(feats)
    smoother = _row_smoother(dists, spec.k)
    proj, ridge_used = _solve_partial_linear(smoother, sample.covariates, spec)
    beta = proj @ sample.responses
    return SfplFit(beta=beta, spec=spec, sample=sample, ridge_used=ridge_used)


def sfpl_predict(fit: SfplFit, query_curve: Curve, query_x: np.ndarray) -> Curve:
    """Linear part at the query covariates plus smoothed partial residuals."""
    sample = fit.sample
    query_x = np.asarray(query_x, dtype=np.float64).reshape(-1)
    if query_x.shape != (sample.p,):
        raise ParameterError(f"query covariates must have length {sample.p}")
    h = knn_bandwidth(query_curve, sample, fit.spec.k, fit.spec.semimetric)
    w = nw_weights(query_curve, sample, h, fit.spec.semimetric)
    partial = sample.responses - sample.covariates @ fit.beta
    return Curve(sample.grid, query_x @ fit.beta + w @ partial)


# ---------------------------------------------------------------------------
# neighbour-count selection by cross-validation


def select_k_cv(
    sample: RegressionSample,
    spec_template: ModelSpec,
    k_grid,
    mode: str = "global",
    query: Curve | None = None,
) -> int:
    """Neighbour count minimising leave-one-out squared prediction error.

    ``global`` weighs every left-out pair equally; ``local`` weighs each
    pair's error by its kernel proximity to ``query`` (bandwidth taken at the
    largest candidate k).  Ties break toward the smaller k.

    For the partial-linear family the linear coefficients are held at their
    full-sample estimate and the smoother is cross-validated on the partial
    residuals.
    """
    k_list = sorted(set(int(k) for k in k_grid))
    if not k_list:
        raise ParameterError("k grid is empty")
    if k_list[0] < 1:
        raise ParameterError(f"k grid contains non-positive entries: {k_list}")
    if k_list[-1] > sample.n - 1:
        raise ParameterError(
            f"k grid reaches {k_list[-1]} but only {sample.n - 1} neighbours "
            "remain after leaving one out"
        )
    if mode not in ("global", "local"):
        raise ParameterError(f"unknown cv mode {mode!r}")

    feats = _sample_features(spec_template.semimetric, sample)
    dists = _kernels.pairwise_dists(feats)

    if spec_template.family == SFPL:
        fit = sfpl_fit(sample, replace(spec_template, k=min(k_list[-1], sample.n)))
        resp = sample.responses - sample.covariates @ fit.beta
    else:
        resp = sample.responses

    if mode == "local":
        if query is None:
            raise ParameterError("local cv mode needs a query curve")
        qd = _kernels.query_dists(feats, _query_feature(spec_template.semimetric, query))
        h_loc = _knn_radius(qd, k_list[-1])
        obs_weights = epanechnikov(qd / h_loc)
        if obs_weights.sum() <= 0.0:
            raise EmptyNeighborhoodError("no pair is kernel-close to the cv query")
    else:
        obs_weights = np.ones(sample.n)

    scores = _kernels.loo_cv_scores(
        dists, resp, np.asarray(k_list, dtype=np.int64), obs_weights, sample.grid.spacing
    )
    return k_list[int(np.argmin(scores))]


# ---------------------------------------------------------------------------
# compiled linear form of either estimator (used by the bootstrap machinery)


@dataclass(frozen=True)
class LinearPredictor:
    """Either estimator reduced to linear functionals of the response matrix.

    With the predictors, bandwidths and (for the partial-linear family) the
    coefficient projector fixed, the fitted values are ``hat @ Z`` and a
    query prediction is ``query_weights(...) @ Z`` for any response matrix Z
    sharing the training predictors.  This is what makes residual
    resampling cheap: refitting on resampled responses is a matrix product.
    """

    sample: RegressionSample
    spec: ModelSpec
    k_used: int
    hat: np.ndarray  # (n, n)
    _feats: np.ndarray
    _proj: np.ndarray | None  # (p, n) coefficient projector, sfpl only
    ridge_used: bool = False

    def fitted(self, responses: np.ndarray | None = None) -> np.ndarray:
        z = self.sample.responses if responses is None else responses
        return self.hat @ z

    def query_weights(
        self, query_curve: Curve, query_x: np.ndarray | None = None
    ) -> np.ndarray:
        """Effective weights a with prediction = a @ Z."""
        qf = _query_feature(self.spec.semimetric, query_curve)
        dists = _kernels.query_dists(self._feats, qf)
        h = _knn_radius(dists, min(self.k_used, self.sample.n))
        w = _weights_from_dists(dists, h)
        if self._proj is None:
            return w
        if query_x is None:
            raise ParameterError("partial-linear prediction needs query covariates")
        query_x = np.asarray(query_x, dtype=np.float64).reshape(-1)
        if query_x.shape != (self.sample.p,):
            raise ParameterError(f"query covariates must have length {self.sample.p}")
        # x_q' beta + w (Z - X beta) == (w + proj' (x_q - X' w)) Z
        return w + self._proj.T @ (query_x - self.sample.covariates.T @ w)

    def predict(
        self,
        query_curve: Curve,
        query_x: np.ndarray | None = None,
        responses: np.ndarray | None = None,
    ) -> np.ndarray:
        z = self.sample.responses if responses is None else responses
        return self.query_weights(query_curve, query_x) @ z


def compile_predictor(
    sample: RegressionSample, spec: ModelSpec, k: int | None = None
) -> LinearPredictor:
    """Precompute the linear form of the estimator at a given neighbour count."""
    k_used = spec.k if k is None else k
    if not 1 <= k_used <= sample.n:
        raise ParameterError(f"k={k_used} outside 1..{sample.n}")
    feats = _sample_features(spec.semimetric, sample)
    dists = _kernels.pairwise_dists(feats)
    smoother = _row_smoother(dists, k_used)
    if spec.family == FNP:
        return LinearPredictor(
            sample=sample, spec=spec, k_used=k_used, hat=smoother,
            _feats=feats, _proj=None,
        )
    if sample.p < 1:
        raise ParameterError("partial-linear fit needs at least one covariate")
    proj, ridge_used = _solve_partial_linear(smoother, sample.covariates, spec)
    x_resid = sample.covariates - smoother @ sample.covariates
    hat = smoother + x_resid @ proj
    return LinearPredictor(
        sample=sample, spec=spec, k_used=k_used, hat=hat,
        _feats=feats, _proj=proj, ridge_used=ridge_used,
    )
