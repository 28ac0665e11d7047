"""Functional PCA of curve samples under the trapezoid inner product.

The discretized covariance is symmetrized with quadrature weights
(eigendecomposition of W^(1/2) C W^(1/2)), which keeps components orthonormal
in L2 rather than in the raw grid coordinates and makes the decomposition
stable under grid refinement. The full eigenvalue spectrum is retained so
explained-variance fractions refer to the total sample variance; only the
leading ``m`` component curves are materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import Curve, FloatArray, WavelengthGrid, trapezoid_weights


@dataclass(frozen=True, eq=False)
class FpcaModel:
    """Mean curve, leading component curves, and the full eigenvalue spectrum."""

    mean: Curve
    components: tuple[Curve, ...]
    eigenvalues: FloatArray
    grid: WavelengthGrid

    def __post_init__(self) -> None:
        eig = np.asarray(self.eigenvalues, dtype=np.float64).copy()
        eig.setflags(write=False)
        if np.any(np.diff(eig) > 0.0):
            raise ValueError("eigenvalues must be sorted non-increasing")
        if np.any(eig < -1e-10):
            raise ValueError("eigenvalues must be non-negative up to roundoff")
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def m(self) -> int:
        return len(self.components)


def fit_fpca(curves: Sequence[Curve], m: int) -> FpcaModel:
    """Principal components of a curve sample.

    Curves are centered by the pointwise mean; the covariance uses divisor n.
    Each component's sign is fixed so its first non-negligible value is
    positive.
    """
    n = len(curves)
    if n < 1:
        raise ValueError("need at least one curve")
    grid = curves[0].grid
    for c in curves[1:]:
        if not c.grid.matches(grid):
            raise ValueError("all curves must share one grid")
    p = len(grid)
    if not 1 <= m <= min(n, p):
        raise ValueError(f"m must be in [1, {min(n, p)}], got {m}")

    data = np.stack([c.values for c in curves])
    mean = data.mean(axis=0)
    centered = data - mean

    w = trapezoid_weights(grid.points)
    sqrt_w = np.sqrt(w)
    cov = centered.T @ centered / n
    sym = sqrt_w[:, None] * cov * sqrt_w[None, :]
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    components = []
    for j in range(m):
        phi = eigvecs[:, j] / sqrt_w
        nonzero = np.nonzero(np.abs(phi) > 1e-12)[0]
        if nonzero.size and phi[nonzero[0]] < 0.0:
            phi = -phi
        components.append(Curve(grid, phi))
    return FpcaModel(Curve(grid, mean), tuple(components), eigvals, grid)


def project(model: FpcaModel, curve: Curve) -> FloatArray:
    """Trapezoid inner products of the centered curve with each component."""
    if not curve.grid.matches(model.grid):
        raise ValueError("curve is not on the FPCA grid")
    w = trapezoid_weights(model.grid.points)
    centered = curve.values - model.mean.values
    return np.array(
        [float(np.sum(w * centered * comp.values)) for comp in model.components]
    )


def reconstruct(model: FpcaModel, scores: FloatArray) -> Curve:
    """Mean plus the score-weighted combination of the components."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size != model.m:
        raise ValueError(f"expected {model.m} scores, got {scores.size}")
    values = model.mean.values + np.stack(
        [c.values for c in model.components]
    ).T @ scores
    return Curve(model.grid, values)


def _total_variance(model: FpcaModel) -> float:
    """Eigenvalue sum, or raise when it is zero up to rounding.

    A sample of identical curves leaves variance at the level of squared
    machine epsilon relative to the curves themselves; that counts as an
    all-zero spectrum.
    """
    total = float(np.sum(np.clip(model.eigenvalues, 0.0, None)))
    w = trapezoid_weights(model.grid.points)
    mean_square = float(np.sum(w * model.mean.values**2))
    if total <= 1e-24 * (total + mean_square):
        raise ValueError("all eigenvalues are zero; variance fractions undefined")
    return total


def explained_variance(model: FpcaModel) -> FloatArray:
    """Cumulative fraction of total variance carried by the leading components."""
    total = _total_variance(model)
    top = np.clip(model.eigenvalues[: model.m], 0.0, None)
    return np.cumsum(top) / total


def scree_rows(model: FpcaModel) -> list[tuple[int, float, float]]:
    """(component index, eigenvalue, cumulative variance fraction) rows."""
    total = _total_variance(model)
    rows = []
    running = 0.0
    for j, lam in enumerate(model.eigenvalues, start=1):
        running += max(float(lam), 0.0)
        rows.append((j, float(lam), running / total))
    return rows
