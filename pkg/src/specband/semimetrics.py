"""Distances between predictor curves used inside the kernel estimator.

Two families: the plain L2 metric (trapezoid-rule integral of the squared
difference) and derivative-based semimetrics of order 1 or 2, which apply
the same integral to finite-difference derivatives and therefore ignore
additive constants (order 1) or affine trends (order 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, FloatArray, ensure_same_grid, trapezoid_weights

_CLI_TOKENS = {"l2": ("l2", 0), "deriv1": ("sobolev", 1), "deriv2": ("sobolev", 2)}


@dataclass(frozen=True)
class SemimetricSpec:
    """Which distance to use: kind "l2", or "sobolev" with order 1 or 2."""

    kind: str = "l2"
    order: int = 0

    def __post_init__(self) -> None:
        if self.kind == "l2":
            if self.order != 0:
                raise ValueError("the l2 semimetric takes no derivative order")
        elif self.kind == "sobolev":
            if self.order not in (1, 2):
                raise ValueError("derivative order must be 1 or 2")
        else:
            raise ValueError(f"unknown semimetric kind: {self.kind!r}")

    @classmethod
    def l2(cls) -> "SemimetricSpec":
        return cls("l2", 0)

    @classmethod
    def sobolev(cls, order: int) -> "SemimetricSpec":
        return cls("sobolev", order)

    @classmethod
    def parse(cls, token: str) -> "SemimetricSpec":
        try:
            kind, order = _CLI_TOKENS[token]
        except KeyError:
            raise ValueError(
                f"unknown semimetric {token!r}; expected one of {sorted(_CLI_TOKENS)}"
            ) from None
        return cls(kind, order)

    @property
    def token(self) -> str:
        return "l2" if self.kind == "l2" else f"deriv{self.order}"


def distance(spec: SemimetricSpec, a: Curve, b: Curve) -> float:
    """Semimetric distance between two curves on a shared grid."""
    ensure_same_grid(a, b)
    pts = a.grid.points
    if spec.kind == "sobolev" and pts.size < spec.order + 2:
        raise ValueError(
            f"order-{spec.order} derivative semimetric needs at least "
            f"{spec.order + 2} grid points"
        )
    diff = a.values - b.values
    for _ in range(spec.order):
        diff = np.gradient(diff, pts)
    w = trapezoid_weights(pts)
    return float(np.sqrt(np.sum(w * diff * diff)))


def distances_to(
    spec: SemimetricSpec, rows: FloatArray, query: FloatArray, points: FloatArray
) -> FloatArray:
    """Distance from each row of a value matrix to one query value vector.

    Direct evaluation of the defining integral (no Gram shortcut), so small
    distances keep full precision.
    """
    pts = np.asarray(points, dtype=np.float64)
    a = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    q = np.asarray(query, dtype=np.float64)
    diff = a - q[None, :]
    for _ in range(spec.order):
        diff = np.gradient(diff, pts, axis=1)
    w = trapezoid_weights(pts)
    return np.sqrt(np.sum(diff * diff * w, axis=1))


def distance_matrix(
    spec: SemimetricSpec, rows: FloatArray, cols: FloatArray, points: FloatArray
) -> FloatArray:
    """All pairwise distances between two stacks of curve values.

    ``rows`` and ``cols`` are (n, p) and (m, p) value matrices on the same
    grid ``points``; returns the (n, m) distance matrix. Same semimetric as
    :func:`distance` evaluated through a Gram product, so entries can differ
    from the scalar path by rounding only.
    """
    pts = np.asarray(points, dtype=np.float64)
    a = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    b = np.atleast_2d(np.asarray(cols, dtype=np.float64))
    for _ in range(spec.order):
        a = np.gradient(a, pts, axis=1)
        b = np.gradient(b, pts, axis=1)
    w = trapezoid_weights(pts)
    sa = np.sum(a * a * w, axis=1)
    sb = np.sum(b * b * w, axis=1)
    gram = a @ (b * w).T
    sq = np.maximum(sa[:, None] + sb[None, :] - 2.0 * gram, 0.0)
    return np.sqrt(sq)
