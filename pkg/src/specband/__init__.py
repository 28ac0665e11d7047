"""Function-on-function kernel regression for spectrum continua.

Predicts the smooth continuum of a quasar spectrum in the Lyman-alpha forest
from the absorption-free segment redward of 1300 A, and quantifies the
uncertainty with distribution-free conformal prediction bands and
wild-bootstrap confidence bands for the projected regression operator.
"""

from .conformal import (
    ConformalBand,
    ConformalCalibration,
    band,
    calibrate,
    conformity_score,
    contains,
)
from .curves import (
    Curve,
    CurvePair,
    RawSpectrum,
    WavelengthGrid,
    normalize_at,
    resample,
    restrict,
    sup_distance,
    to_rest_frame,
)
from .evaluation import (
    ErrorSummary,
    coverage_rate,
    plain_error,
    relative_absorption,
    relative_error,
    summarize,
)
from .fpca import FpcaModel, explained_variance, fit_fpca, project, reconstruct
from .mockgen import MockModel, MockRealization, generate, synthetic_model
from .pipeline import PipelineConfig, load_config, spectrum_to_pair
from .regression import (
    FittedRegression,
    KernelSpec,
    knn_bandwidth,
    predict,
    select_kappa_cv,
)
from .semimetrics import SemimetricSpec, distance
from .smoothing import SmootherConfig, select_span_cv, smooth
from .wild_bootstrap import (
    BootstrapBand,
    WildBootstrapConfig,
    bootstrap_bands,
    sample_v,
)

__all__ = [
    "Curve",
    "CurvePair",
    "RawSpectrum",
    "WavelengthGrid",
    "normalize_at",
    "resample",
    "restrict",
    "sup_distance",
    "to_rest_frame",
    "SmootherConfig",
    "smooth",
    "select_span_cv",
    "SemimetricSpec",
    "distance",
    "KernelSpec",
    "FittedRegression",
    "knn_bandwidth",
    "predict",
    "select_kappa_cv",
    "ConformalBand",
    "ConformalCalibration",
    "conformity_score",
    "calibrate",
    "band",
    "contains",
    "FpcaModel",
    "fit_fpca",
    "project",
    "reconstruct",
    "explained_variance",
    "WildBootstrapConfig",
    "BootstrapBand",
    "sample_v",
    "bootstrap_bands",
    "MockModel",
    "MockRealization",
    "generate",
    "synthetic_model",
    "ErrorSummary",
    "relative_error",
    "plain_error",
    "summarize",
    "coverage_rate",
    "relative_absorption",
    "PipelineConfig",
    "load_config",
    "spectrum_to_pair",
]
