"""Wild bootstrap confidence bands for the projected regression operator.

Residual curves are resampled with replacement and multiplied by independent
two-point perturbations whose first three moments are 0, 1, 1, preserving
residual variance and skewness under the resampling measure. Each replicate
re-evaluates the kernel estimator at the query point with the original
weights (they depend only on the training predictors) and is projected onto
the leading principal components of the responses; per-coordinate empirical
quantiles at Bonferroni-split levels alpha/(2m) and 1 - alpha/(2m) form a
coefficient box, mapped through the basis into a pointwise envelope.

Determinism contract: replicate b draws from the b-th child of the root seed
sequence, first the n resampling indices and then the n perturbation draws,
so results are reproducible regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import Curve, CurvePair, FloatArray
from .fpca import FpcaModel, project, trapezoid_weights
from .regression import FittedRegression, predict_many, prediction_weights

V_LOW = (1.0 - math.sqrt(5.0)) / 2.0
V_HIGH = (1.0 + math.sqrt(5.0)) / 2.0
V_LOW_PROB = 0.1 * (5.0 + math.sqrt(5.0))


@dataclass(frozen=True)
class WildBootstrapConfig:
    """Replicate count, component count, coverage level and root seed."""

    replicates: int = 500
    components: int = 5
    alpha: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("need at least one bootstrap replicate")
        if self.components < 1:
            raise ValueError("need at least one component")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True, eq=False)
class BootstrapBand:
    """Per-component coefficient intervals and the induced pointwise envelope."""

    component_intervals: FloatArray  # (m, 2) lower/upper coefficient bounds
    fpca: FpcaModel
    envelope_lower: Curve
    envelope_upper: Curve
    alpha: float
    replicates: int

    def __post_init__(self) -> None:
        intervals = np.asarray(self.component_intervals, dtype=np.float64).copy()
        intervals.setflags(write=False)
        if intervals.ndim != 2 or intervals.shape[1] != 2:
            raise ValueError("component_intervals must have shape (m, 2)")
        if np.any(intervals[:, 0] > intervals[:, 1]):
            raise ValueError("each interval must satisfy lower <= upper")
        if np.any(self.envelope_lower.values > self.envelope_upper.values):
            raise ValueError("envelope lower must not exceed envelope upper")
        object.__setattr__(self, "component_intervals", intervals)


def sample_v(count: int, seed: int) -> FloatArray:
    """Draws from the two-point perturbation law.

    Takes (1 - sqrt(5))/2 with probability (5 + sqrt(5))/10 and
    (1 + sqrt(5))/2 otherwise; mean 0, second and third moments 1.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    return _draw_v(rng, count)


def _draw_v(rng: np.random.Generator, count: int) -> FloatArray:
    return np.where(rng.random(count) < V_LOW_PROB, V_LOW, V_HIGH)


def quantile_levels(alpha: float, m: int) -> tuple[float, float]:
    """Bonferroni-split per-coordinate quantile levels."""
    return alpha / (2 * m), 1.0 - alpha / (2 * m)


def _nearest_rank(sorted_values: FloatArray, level: float) -> float:
    """Empirical quantile by the nearest-rank (ceiling) convention."""
    b = sorted_values.size
    rank = min(max(int(math.ceil(level * b)), 1), b)
    return float(sorted_values[rank - 1])


def bootstrap_bands(
    sample: Sequence[CurvePair],
    model: FittedRegression,
    x: Curve,
    fpca_model: FpcaModel,
    config: WildBootstrapConfig,
) -> BootstrapBand:
    """Confidence band for the projected regression operator at ``x``.

    ``model`` must be fitted on ``sample`` (its neighbor count already
    selected) and ``fpca_model`` on the sample's responses. Residuals are
    those of the fitted model on its own training pairs.
    """
    m = config.components
    if m > fpca_model.m:
        raise ValueError(
            f"config asks for {m} components but the FPCA model holds {fpca_model.m}"
        )
    low_level, high_level = quantile_levels(config.alpha, m)
    if config.replicates * min(low_level, 1.0) < 1.0:
        raise ValueError(
            f"B={config.replicates} replicates cannot resolve the "
            f"{low_level} quantile; increase B to at least "
            f"{int(math.ceil(1.0 / low_level))}"
        )

    n = len(sample)
    if n != model.n:
        raise ValueError("the model must be fitted on the given sample")
    if not fpca_model.grid.matches(model.response_grid):
        raise ValueError("the FPCA model is not on the regression's response grid")
    x_mat = np.stack([p.predictor.values for p in sample])
    y_mat = np.stack([p.response.values for p in sample])
    fitted = predict_many(model, x_mat)
    residuals = y_mat - fitted

    weights = prediction_weights(model, x)
    point_part = weights @ fitted  # fixed across replicates

    children = np.random.SeedSequence(config.seed).spawn(config.replicates)
    coords = np.empty((config.replicates, m))
    grid_w = trapezoid_weights(fpca_model.grid.points)
    comp_mat = np.stack([c.values for c in fpca_model.components[:m]])
    mean_vals = fpca_model.mean.values
    for b, child in enumerate(children):
        rng = np.random.default_rng(child)
        draw = rng.integers(0, n, size=n)
        v = _draw_v(rng, n)
        replicate = point_part + (weights * v) @ residuals[draw]
        coords[b] = (grid_w * (replicate - mean_vals)) @ comp_mat.T

    intervals = np.empty((m, 2))
    for j in range(m):
        ordered = np.sort(coords[:, j])
        intervals[j, 0] = _nearest_rank(ordered, low_level)
        intervals[j, 1] = _nearest_rank(ordered, high_level)

    # exact pointwise extremes of sum_j a_j * phi_j over the coefficient box:
    # where a component is negative its interval endpoints swap roles
    lo_part = np.minimum(
        intervals[:, 0][:, None] * comp_mat, intervals[:, 1][:, None] * comp_mat
    ).sum(axis=0)
    hi_part = np.maximum(
        intervals[:, 0][:, None] * comp_mat, intervals[:, 1][:, None] * comp_mat
    ).sum(axis=0)
    lower = Curve(fpca_model.grid, mean_vals + lo_part)
    upper = Curve(fpca_model.grid, mean_vals + hi_part)
    return BootstrapBand(
        intervals, fpca_model, lower, upper, config.alpha, config.replicates
    )
