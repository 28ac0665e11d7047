"""Local quadratic polynomial smoothing of noisy spectra.

At each output wavelength a quadratic is fitted by weighted least squares to
the span-nearest samples, with tricube weights on the distance normalized by
the window radius; the fitted intercept is the smoothed value. The span (the
fraction of in-range samples per window) is selected by 2-fold
cross-validation on interleaved even/odd folds.

The window is widened minimally whenever fewer than three samples would
carry positive weight (the tricube vanishes at the window edge), so a
noiseless quadratic input is reproduced exactly for every admissible span.
The noise-sd column of the input spectrum is not used as a fitting weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, FloatArray, RawSpectrum, WavelengthGrid

# relative slack under which candidate CV scores count as tied
_CV_TIE_RTOL = 1e-9

_DEFAULT_SPANS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class SmootherConfig:
    """Local-fit settings: polynomial degree (fixed at 2), span, CV candidates."""

    degree: int = 2
    span: float = 0.5
    candidate_spans: tuple[float, ...] = _DEFAULT_SPANS

    def __post_init__(self) -> None:
        if self.degree != 2:
            raise ValueError("only quadratic local fits are supported (degree=2)")
        if not 0.0 < self.span <= 1.0:
            raise ValueError("span must be in (0, 1]")
        if len(self.candidate_spans) == 0:
            raise ValueError("candidate_spans must not be empty")
        for s in self.candidate_spans:
            if not 0.0 < s <= 1.0:
                raise ValueError("every candidate span must be in (0, 1]")


def _in_range(
    spectrum: RawSpectrum, wl_range: tuple[float, float]
) -> tuple[FloatArray, FloatArray]:
    low, high = wl_range
    if low >= high:
        raise ValueError(f"empty wavelength range [{low}, {high}]")
    mask = (spectrum.wavelengths >= low) & (spectrum.wavelengths <= high)
    return spectrum.wavelengths[mask], spectrum.flux[mask]


def _fit_values(
    lam: FloatArray, flux: FloatArray, out: FloatArray, span: float
) -> FloatArray:
    """Evaluate the local quadratic fit at each output wavelength."""
    m = lam.size
    base_q = min(m, max(4, int(np.ceil(span * m))))

    dist = np.abs(lam[None, :] - out[:, None])
    sorted_dist = np.sort(dist, axis=1)

    # per-row window radius; widen until >= 3 samples sit strictly inside
    scale = np.empty(out.size)
    for r in range(out.size):
        row = sorted_dist[r]
        q = base_q
        while q < m and np.searchsorted(row, row[q - 1], side="left") < 3:
            q += 1
        if np.searchsorted(row, row[q - 1], side="left") < 3:
            raise ValueError(
                f"singular local fit at wavelength {out[r]}: fewer than 3 "
                "samples carry positive weight"
            )
        scale[r] = row[q - 1]

    u = dist / scale[:, None]
    weights = np.where(u < 1.0, (1.0 - u**3) ** 3, 0.0)

    # quadratic basis in the scaled offset keeps the normal equations well
    # conditioned; the intercept is the fitted value at the output point
    t = (lam[None, :] - out[:, None]) / scale[:, None]
    design = np.stack([np.ones_like(t), t, t * t], axis=2)
    normal = np.einsum("ri,ria,rib->rab", weights, design, design)
    rhs = np.einsum("ri,ria,i->ra", weights, design, flux)
    try:
        beta = np.linalg.solve(normal, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        for r in range(out.size):
            try:
                np.linalg.solve(normal[r], rhs[r])
            except np.linalg.LinAlgError:
                raise ValueError(
                    f"singular local fit at wavelength {out[r]}"
                ) from None
        raise
    return beta[:, 0]


def smooth(
    spectrum: RawSpectrum,
    wl_range: tuple[float, float],
    config: SmootherConfig,
    output_grid: WavelengthGrid,
) -> Curve:
    """Smooth the in-range samples onto ``output_grid``.

    Requires at least 3*(degree+1) samples inside ``wl_range`` and an output
    grid contained in it.
    """
    lam, flux = _in_range(spectrum, wl_range)
    needed = 3 * (config.degree + 1)
    if lam.size < needed:
        raise ValueError(
            f"need at least {needed} samples in [{wl_range[0]}, {wl_range[1]}], "
            f"found {lam.size}"
        )
    if output_grid.low < wl_range[0] or output_grid.high > wl_range[1]:
        raise ValueError("output grid extends beyond the smoothing range")
    return Curve(output_grid, _fit_values(lam, flux, output_grid.points, config.span))


def cv_scores(
    spectrum: RawSpectrum, wl_range: tuple[float, float], config: SmootherConfig
) -> list[tuple[float, float]]:
    """Symmetrized 2-fold CV error for each candidate span.

    Samples are split into interleaved even/odd-index folds; each fold is
    fitted and scored on the other, and the two squared-error totals are
    summed. Candidates whose fit fails score infinity.
    """
    lam, flux = _in_range(spectrum, wl_range)
    if lam.size < 20:
        raise ValueError(
            f"span cross-validation needs at least 20 samples in range, found {lam.size}"
        )
    even = np.arange(lam.size) % 2 == 0
    folds = [(even, ~even), (~even, even)]
    table: list[tuple[float, float]] = []
    for span in config.candidate_spans:
        total = 0.0
        for fit_mask, score_mask in folds:
            try:
                pred = _fit_values(lam[fit_mask], flux[fit_mask], lam[score_mask], span)
            except ValueError:
                total = np.inf
                break
            total += float(np.sum((pred - flux[score_mask]) ** 2))
        table.append((float(span), total))
    return table


def select_span_cv(
    spectrum: RawSpectrum, wl_range: tuple[float, float], config: SmootherConfig
) -> float:
    """Pick the candidate span minimizing the 2-fold CV error.

    Scores within a small relative slack of the minimum count as tied, and
    ties go to the largest span; the outcome does not depend on the order of
    ``candidate_spans``.
    """
    table = cv_scores(spectrum, wl_range, config)
    best = min(score for _, score in table)
    if not np.isfinite(best):
        raise ValueError("every candidate span failed to fit")
    cutoff = best + _CV_TIE_RTOL * (1.0 + best)
    return max(span for span, score in table if score <= cutoff)
