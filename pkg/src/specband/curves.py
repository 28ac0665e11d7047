"""Sampled-function data model: wavelength grids, curves, raw spectra.

Every quantity downstream (predictors, responses, predictions, band
envelopes) is a function sampled on a shared wavelength grid; this module
owns that representation plus the rest-frame conversion and the handful of
curve operations everything else builds on. All types are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


def _as_readonly_float_array(values, name: str) -> FloatArray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WavelengthGrid:
    """Strictly increasing, positive, finite wavelengths in angstroms."""

    points: FloatArray

    def __post_init__(self) -> None:
        pts = _as_readonly_float_array(self.points, "grid points")
        if pts.size < 2:
            raise ValueError("a wavelength grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(pts <= 0.0):
            raise ValueError("grid points must be positive")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, low: float, high: float, count: int) -> "WavelengthGrid":
        if count < 2:
            raise ValueError("a uniform grid needs at least 2 points")
        return cls(np.linspace(low, high, count))

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def low(self) -> float:
        return float(self.points[0])

    @property
    def high(self) -> float:
        return float(self.points[-1])

    def matches(self, other: "WavelengthGrid") -> bool:
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class Curve:
    """A function sampled on a wavelength grid (normalized flux units)."""

    grid: WavelengthGrid
    values: FloatArray

    def __post_init__(self) -> None:
        vals = _as_readonly_float_array(self.values, "curve values")
        if vals.size != len(self.grid):
            raise ValueError(
                f"curve has {vals.size} values for a {len(self.grid)}-point grid"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> "Curve":
        return Curve(self.grid, values)


@dataclass(frozen=True, eq=False)
class RawSpectrum:
    """Irregular noisy samples (wavelength, flux, noise sd) before smoothing.

    The noise-sd column travels with the samples but is ignored by the
    smoother; ``redshift`` is the source redshift, zero once the spectrum has
    been moved to the rest frame.
    """

    wavelengths: FloatArray
    flux: FloatArray
    noise_sd: FloatArray
    redshift: float = 0.0

    def __post_init__(self) -> None:
        wl = _as_readonly_float_array(self.wavelengths, "wavelengths")
        fx = _as_readonly_float_array(self.flux, "flux")
        sd = _as_readonly_float_array(self.noise_sd, "noise_sd")
        if wl.size < 10:
            raise ValueError("a raw spectrum needs at least 10 samples")
        if fx.size != wl.size or sd.size != wl.size:
            raise ValueError("wavelengths, flux and noise_sd must have equal length")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(fx)) and np.all(np.isfinite(sd))):
            raise ValueError("spectrum samples must be finite")
        if np.any(np.diff(wl) <= 0.0):
            raise ValueError("sample wavelengths must be strictly increasing")
        if np.any(sd < 0.0):
            raise ValueError("noise sd must be non-negative")
        if not np.isfinite(self.redshift) or self.redshift < 0.0:
            raise ValueError("redshift must be a finite non-negative number")
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "flux", fx)
        object.__setattr__(self, "noise_sd", sd)
        object.__setattr__(self, "redshift", float(self.redshift))

    def __len__(self) -> int:
        return int(self.wavelengths.size)


@dataclass(frozen=True, eq=False)
class CurvePair:
    """A (predictor, response) pair on disjoint wavelength ranges.

    The predictor lives redward of the response: predictor grid min must be
    at or above the response grid max.
    """

    predictor: Curve
    response: Curve

    def __post_init__(self) -> None:
        if self.predictor.grid.low < self.response.grid.high:
            raise ValueError(
                "predictor grid must start at or above the response grid end "
                f"({self.predictor.grid.low} < {self.response.grid.high})"
            )


def to_rest_frame(spectrum: RawSpectrum) -> RawSpectrum:
    """Divide every wavelength by (1 + z); fluxes and noise sds unchanged.

    Idempotent after the first application since the result carries z = 0.
    """
    if spectrum.redshift == 0.0:
        return spectrum
    return RawSpectrum(
        wavelengths=spectrum.wavelengths / (1.0 + spectrum.redshift),
        flux=spectrum.flux,
        noise_sd=spectrum.noise_sd,
        redshift=0.0,
    )


def resample(curve: Curve, target: WavelengthGrid) -> Curve:
    """Linearly interpolate a curve onto a target grid.

    Exact (bitwise) when the target equals the source grid; raises when any
    target wavelength falls outside the source range.
    """
    if curve.grid.matches(target):
        return Curve(target, curve.values)
    src = curve.grid.points
    if target.low < src[0]:
        raise ValueError(
            f"cannot resample: target wavelength {target.low} below curve range "
            f"[{src[0]}, {src[-1]}]"
        )
    if target.high > src[-1]:
        raise ValueError(
            f"cannot resample: target wavelength {target.high} above curve range "
            f"[{src[0]}, {src[-1]}]"
        )
    return Curve(target, np.interp(target.points, src, curve.values))


def sup_distance(a: Curve, b: Curve) -> float:
    """Sup-norm distance max over the shared grid of |a - b|."""
    ensure_same_grid(a, b)
    return float(np.max(np.abs(a.values - b.values)))


def ensure_same_grid(a: Curve, b: Curve) -> None:
    if not a.grid.matches(b.grid):
        raise ValueError("curves are sampled on different wavelength grids")


def restrict(curve: Curve, low: float, high: float) -> Curve:
    """Slice a curve to the grid points inside [low, high]."""
    mask = (curve.grid.points >= low) & (curve.grid.points <= high)
    if mask.sum() < 2:
        raise ValueError(f"fewer than 2 grid points inside [{low}, {high}]")
    return Curve(WavelengthGrid(curve.grid.points[mask]), curve.values[mask])


def nearest_index(grid: WavelengthGrid, wavelength: float) -> int:
    """Index of the grid point closest to the given wavelength."""
    return int(np.argmin(np.abs(grid.points - wavelength)))


def normalize_at(curve: Curve, wavelength: float) -> Curve:
    """Divide a curve by its value at the grid point nearest ``wavelength``."""
    ref = curve.values[nearest_index(curve.grid, wavelength)]
    if ref == 0.0:
        raise ValueError(f"cannot normalize: flux is zero near {wavelength}")
    return curve.with_values(curve.values / ref)


def trapezoid_weights(points: FloatArray) -> FloatArray:
    """Quadrature weights so that w @ f equals the trapezoid integral of f."""
    pts = np.asarray(points, dtype=np.float64)
    w = np.empty_like(pts)
    w[0] = (pts[1] - pts[0]) / 2.0
    w[-1] = (pts[-1] - pts[-2]) / 2.0
    w[1:-1] = (pts[2:] - pts[:-2]) / 2.0
    return w
