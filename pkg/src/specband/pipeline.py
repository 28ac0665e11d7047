"""Configuration and the wiring from raw spectra to fitted curve pairs.

One config object drives every CLI command; each field maps one-to-one onto
a CLI flag and a JSON config key. The predictor segment lives redward of
1300 A, the response segment on 1050-1185 A, and both smoothed curves are
divided by the predictor's value at the grid point nearest the
normalization wavelength before entering the regression.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .curves import (
    Curve,
    CurvePair,
    RawSpectrum,
    WavelengthGrid,
    nearest_index,
    to_rest_frame,
)
from .regression import FittedRegression, KernelSpec, kappa_cv_scores
from .semimetrics import SemimetricSpec
from .smoothing import SmootherConfig, select_span_cv, smooth


@dataclass(frozen=True)
class PipelineConfig:
    predictor_range: tuple[float, float] = (1300.0, 1600.0)
    response_range: tuple[float, float] = (1050.0, 1185.0)
    predictor_points: int = 300
    response_points: int = 200
    normalization_wavelength: float = 1300.0
    semimetric: str = "l2"
    kappa: int | None = None
    kappa_candidates: tuple[int, ...] = (2, 4, 8, 16, 32)
    span: float | None = None
    span_candidates: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    alpha: float = 0.1
    bootstrap_replicates: int = 500
    bootstrap_components: int = 5
    seed: int = 0
    mock_count: int = 100
    mock_grid_points: int = 551
    mock_components: int = 10
    mock_eigenvalue_decay: float = 0.5
    mock_variance_scale: float = 2.5
    mock_noise_level: float = 0.05

    def __post_init__(self) -> None:
        if self.response_range[1] >= self.predictor_range[0]:
            raise ValueError(
                "response range must end strictly below the predictor range"
            )
        for low, high in (self.predictor_range, self.response_range):
            if low >= high:
                raise ValueError(f"empty wavelength range [{low}, {high}]")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        SemimetricSpec.parse(self.semimetric)

    @property
    def semimetric_spec(self) -> SemimetricSpec:
        return SemimetricSpec.parse(self.semimetric)

    def predictor_grid(self) -> WavelengthGrid:
        return WavelengthGrid.uniform(*self.predictor_range, self.predictor_points)

    def response_grid(self) -> WavelengthGrid:
        return WavelengthGrid.uniform(*self.response_range, self.response_points)

    def mock_grid(self) -> WavelengthGrid:
        return WavelengthGrid.uniform(
            self.response_range[0], self.predictor_range[1], self.mock_grid_points
        )

    def smoother(self) -> SmootherConfig:
        span = self.span if self.span is not None else 0.5
        return SmootherConfig(span=span, candidate_spans=self.span_candidates)


_TUPLE_FIELDS = {
    "predictor_range": float,
    "response_range": float,
    "kappa_candidates": int,
    "span_candidates": float,
}


def load_config(path: Path | None = None, **overrides) -> PipelineConfig:
    """Config from an optional JSON file, updated with keyword overrides.

    Overrides whose value is None are ignored, so CLI flags can be passed
    through unconditionally.
    """
    values: dict = {}
    if path is not None:
        with open(path) as handle:
            values.update(json.load(handle))
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for name, cast in _TUPLE_FIELDS.items():
        if name in values:
            values[name] = tuple(cast(v) for v in values[name])
    return PipelineConfig(**values)


def _smooth_segment(
    spectrum: RawSpectrum,
    wl_range: tuple[float, float],
    grid: WavelengthGrid,
    config: PipelineConfig,
) -> Curve:
    smoother = config.smoother()
    if config.span is None:
        span = select_span_cv(spectrum, wl_range, smoother)
        smoother = dataclasses.replace(smoother, span=span)
    return smooth(spectrum, wl_range, smoother, grid)


def spectrum_to_predictor(
    spectrum: RawSpectrum, config: PipelineConfig
) -> tuple[Curve, float]:
    """Rest-frame, smooth and normalize the predictor segment.

    Returns the normalized curve together with the normalization constant
    (the smoothed flux at the grid point nearest the normalization
    wavelength), which callers need to place truths on the same scale.
    """
    rest = to_rest_frame(spectrum)
    curve = _smooth_segment(rest, config.predictor_range, config.predictor_grid(), config)
    ref = curve.values[nearest_index(curve.grid, config.normalization_wavelength)]
    if ref <= 0.0:
        raise ValueError(
            "cannot normalize spectrum: smoothed flux is not positive at "
            f"{config.normalization_wavelength}"
        )
    return curve.with_values(curve.values / ref), float(ref)


def spectrum_to_pair(
    spectrum: RawSpectrum, config: PipelineConfig
) -> tuple[CurvePair, float]:
    """Rest-frame, smooth both segments, normalize by the predictor flux."""
    rest = to_rest_frame(spectrum)
    predictor, ref = spectrum_to_predictor(rest, config)
    response = _smooth_segment(rest, config.response_range, config.response_grid(), config)
    return CurvePair(predictor, response.with_values(response.values / ref)), ref


def covers_response_range(spectrum: RawSpectrum, config: PipelineConfig) -> bool:
    rest = to_rest_frame(spectrum)
    low, high = config.response_range
    inside = (rest.wavelengths >= low) & (rest.wavelengths <= high)
    return int(inside.sum()) >= 9


def fit_pairs(
    pairs: list[CurvePair], config: PipelineConfig
) -> tuple[FittedRegression, list[tuple[int, float]]]:
    """Select the neighbor count (unless fixed) and build the regression."""
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 usable spectra to fit, got {len(pairs)}")
    kernel = KernelSpec()
    spec = config.semimetric_spec
    if config.kappa is not None:
        return FittedRegression(tuple(pairs), spec, kernel, config.kappa), []
    candidates = sorted(
        {k for k in config.kappa_candidates if 1 <= k <= len(pairs) - 1}
    )
    if not candidates:
        raise ValueError(
            f"no kappa candidate fits the sample size n={len(pairs)}"
        )
    table = kappa_cv_scores(pairs, spec, kernel, candidates)
    best_kappa, best_score = table[0]
    for kappa, score in table[1:]:
        if score < best_score:
            best_kappa, best_score = kappa, score
    return FittedRegression(tuple(pairs), spec, kernel, best_kappa), table
