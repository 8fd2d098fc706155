"""Bootstrap prediction regions for seasonal curve time series.

Forecasts the next curve of a daily (or otherwise seasonal) functional time
series with kernel-regression estimators, and wraps the forecast in a
prediction region built from residual-bootstrap replicates: a norm ball, a
variance-scaled band, or a depth envelope.  Includes evaluation metrics, a
rolling backtest harness, and synthetic-process calibration checks.
"""

from .bootstrap import (
    BallRegion,
    BandRegion,
    BootstrapRun,
    PredictionRegion,
    ResidualSet,
    bisect_lambda,
    bootstrap_resample,
    build_bootstrap_run,
    center_residuals,
    depth_region,
    lambda_region,
    lp_region,
    sigma_star,
)
from .curves import Curve, Grid, NormTag, l1_distance, norm_lp
from .depth import DepthConfig, random_tukey_depth
from .errors import (
    CurvebandError,
    DataError,
    DegenerateBandwidthError,
    EmptyNeighborhoodError,
    GridMismatchError,
    InsufficientHistoryError,
    NonConvergenceError,
    ParameterError,
    SingularDesignError,
)
from .evaluation import (
    RegionOutcome,
    RegionReport,
    awidth,
    contains,
    fws,
    make_report,
    pointwise_contains,
    winkler_pointwise,
)
from .harness import (
    BacktestConfig,
    BacktestResult,
    CalibrationResult,
    calibrate,
    construct_region,
    rolling_evaluate,
)
from .ingest import (
    DayType,
    FunctionalSample,
    HourlyRecord,
    build_daily_curves,
    day_type_sets,
    hdd_cdd,
    load_hourly_csv,
    replace_outliers,
)
from .regression import (
    ModelSpec,
    RegressionSample,
    SfplFit,
    epanechnikov,
    fnp_predict,
    knn_bandwidth,
    nw_weights,
    select_k_cv,
    sfpl_fit,
    sfpl_predict,
)
from .reports import emit_reports
from .semimetrics import (
    SemimetricModel,
    fpca_semimetric_fit,
    l2_semimetric,
    semimetric_eval,
)
from .synthetic import SyntheticSpec, synthetic_far1

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig",
    "BacktestResult",
    "BallRegion",
    "BandRegion",
    "BootstrapRun",
    "CalibrationResult",
    "Curve",
    "CurvebandError",
    "DataError",
    "DayType",
    "DegenerateBandwidthError",
    "DepthConfig",
    "EmptyNeighborhoodError",
    "FunctionalSample",
    "Grid",
    "GridMismatchError",
    "HourlyRecord",
    "InsufficientHistoryError",
    "ModelSpec",
    "NonConvergenceError",
    "NormTag",
    "ParameterError",
    "PredictionRegion",
    "RegionOutcome",
    "RegionReport",
    "RegressionSample",
    "ResidualSet",
    "SemimetricModel",
    "SfplFit",
    "SingularDesignError",
    "SyntheticSpec",
    "awidth",
    "bisect_lambda",
    "bootstrap_resample",
    "build_bootstrap_run",
    "build_daily_curves",
    "calibrate",
    "center_residuals",
    "construct_region",
    "contains",
    "day_type_sets",
    "depth_region",
    "emit_reports",
    "epanechnikov",
    "fnp_predict",
    "fpca_semimetric_fit",
    "fws",
    "hdd_cdd",
    "knn_bandwidth",
    "l1_distance",
    "l2_semimetric",
    "lambda_region",
    "load_hourly_csv",
    "lp_region",
    "make_report",
    "norm_lp",
    "nw_weights",
    "pointwise_contains",
    "random_tukey_depth",
    "replace_outliers",
    "rolling_evaluate",
    "select_k_cv",
    "semimetric_eval",
    "sfpl_fit",
    "sfpl_predict",
    "sigma_star",
    "synthetic_far1",
    "winkler_pointwise",
]
