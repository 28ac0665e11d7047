"""Split conformal prediction bands with finite-sample marginal coverage.

The sample is split in half: a regression is fitted on the first part and
sup-norm conformity scores are collected on the second. The band around a
new prediction is the centered sup-norm ball whose radius is the k-th
smallest calibration score (negated), with k = floor((n2 + 1) * alpha); the
rank statistics of exchangeable scores make the band contain a fresh
response with probability at least 1 - alpha, for any data distribution.

When k = 0 the guarantee can only be met by the whole response space, so the
band is returned with an infinite half-width and a ``degenerate`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .curves import Curve, CurvePair, FloatArray, sup_distance
from .regression import FittedRegression, KernelSpec, predict, select_kappa_cv
from .semimetrics import SemimetricSpec


@dataclass(frozen=True, eq=False)
class ConformalCalibration:
    """A split-fitted model plus the held-out conformity scores."""

    trained_model: FittedRegression
    calibration_scores: FloatArray
    alpha: float
    split_seed: int

    def __post_init__(self) -> None:
        scores = np.asarray(self.calibration_scores, dtype=np.float64).copy()
        scores.setflags(write=False)
        if scores.size < 1:
            raise ValueError("calibration needs at least one score")
        if not np.all(np.isfinite(scores)) or np.any(scores > 0.0):
            raise ValueError("conformity scores must be finite and non-positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        object.__setattr__(self, "calibration_scores", scores)

    @property
    def n2(self) -> int:
        return int(self.calibration_scores.size)


@dataclass(frozen=True, eq=False)
class ConformalBand:
    """Constant-width sup-norm band: center curve plus half-width."""

    center: Curve
    half_width: float
    alpha: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not self.degenerate and not (
            np.isfinite(self.half_width) and self.half_width >= 0.0
        ):
            raise ValueError("half width must be finite and non-negative")

    def lower(self) -> Curve:
        if self.degenerate:
            raise ValueError("degenerate band has no finite envelope")
        return self.center.with_values(self.center.values - self.half_width)

    def upper(self) -> Curve:
        if self.degenerate:
            raise ValueError("degenerate band has no finite envelope")
        return self.center.with_values(self.center.values + self.half_width)


def conformity_score(model: FittedRegression, x: Curve, y: Curve) -> float:
    """Negative sup distance between ``y`` and the model prediction at ``x``."""
    return -sup_distance(y, predict(model, x))


def calibrate(
    sample: Sequence[CurvePair],
    alpha: float,
    semimetric: SemimetricSpec,
    kernel: KernelSpec,
    kappa_candidates: Sequence[int],
    split_seed: int,
) -> ConformalCalibration:
    """Split the sample, fit on one half, score conformity on the other.

    The split draws floor(n/2) pairs without replacement using the given
    seed (recorded on the result); the neighbor count is re-selected by
    leave-one-out CV on the fitted half alone.
    """
    n = len(sample)
    if n < 4:
        raise ValueError(f"conformal calibration needs at least 4 pairs, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")

    rng = np.random.default_rng(split_seed)
    order = rng.permutation(n)
    n1 = n // 2
    fit_pairs = [sample[i] for i in order[:n1]]
    score_pairs = [sample[i] for i in order[n1:]]

    candidates = sorted({min(max(int(k), 1), n1 - 1) for k in kappa_candidates})
    if n1 >= 3 and len(candidates) > 1:
        kappa = select_kappa_cv(fit_pairs, semimetric, kernel, candidates)
    else:
        kappa = candidates[0]
    model = FittedRegression(tuple(fit_pairs), semimetric, kernel, kappa)

    scores = np.array(
        [conformity_score(model, p.predictor, p.response) for p in score_pairs]
    )
    return ConformalCalibration(model, scores, float(alpha), int(split_seed))


def _score_rank(n2: int, alpha: float) -> int:
    # floor((n2 + 1) * alpha) in exact rational arithmetic, so boundary cases
    # like 10 * 0.1 never misround
    return math.floor(Fraction(alpha) * (n2 + 1))


def band(cal: ConformalCalibration, x: Curve) -> ConformalBand:
    """Band around the split-model prediction at ``x``.

    The half-width is minus the k-th smallest calibration score with
    k = floor((n2 + 1) * alpha); k = 0 yields the degenerate all-covering
    band.
    """
    center = predict(cal.trained_model, x)
    k = _score_rank(cal.n2, cal.alpha)
    if k < 1:
        return ConformalBand(center, math.inf, cal.alpha, degenerate=True)
    q = float(np.sort(cal.calibration_scores)[k - 1])
    return ConformalBand(center, -q, cal.alpha, degenerate=False)


def contains(band_: ConformalBand, y: Curve) -> bool:
    """Whether ``y`` stays within the band (always true when degenerate)."""
    if band_.degenerate:
        return True
    return sup_distance(y, band_.center) <= band_.half_width
