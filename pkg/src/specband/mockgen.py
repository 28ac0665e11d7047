"""Mock quasar spectrum generation.

A mock is a mean curve plus a Gaussian combination of orthonormal
eigenspectra plus heteroskedastic pointwise noise; no absorption is
simulated, so the noise-free part of each realization is the true continuum
that predictions are judged against. A synthetic model builder stands in
when no externally derived mean/eigenspectra files are available: Gaussian
emission-line bumps on a shallow power law for the mean, Gram-Schmidt
orthonormalized damped cosines for the eigenspectra, geometric eigenvalue
decay, and a noise-sd curve inflated toward the grid edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import (
    Curve,
    FloatArray,
    RawSpectrum,
    WavelengthGrid,
    nearest_index,
    resample,
    trapezoid_weights,
)

# Gaussian emission-line bumps for the synthetic mean: (center, amplitude, width)
_MEAN_BUMPS = (
    (1216.0, 0.55, 22.0),
    (1240.0, 0.22, 14.0),
    (1400.0, 0.18, 20.0),
    (1549.0, 0.38, 22.0),
    (1122.0, 0.08, 12.0),
)
_POWER_LAW_SLOPE = -0.6
_EDGE_NOISE_BOOST = 2.0


@dataclass(frozen=True, eq=False)
class MockModel:
    """Mean curve, eigenspectra, eigenvalues and noise-sd curve on one grid."""

    mu: Curve
    xi: tuple[Curve, ...]
    eigenvalues: FloatArray
    sigma: Curve

    def __post_init__(self) -> None:
        eig = np.asarray(self.eigenvalues, dtype=np.float64).copy()
        eig.setflags(write=False)
        object.__setattr__(self, "xi", tuple(self.xi))
        object.__setattr__(self, "eigenvalues", eig)
        if eig.size != len(self.xi):
            raise ValueError("one eigenvalue per eigenspectrum is required")
        if np.any(eig < 0.0):
            raise ValueError("eigenvalues must be non-negative")
        grid = self.mu.grid
        for component in self.xi:
            if not component.grid.matches(grid):
                raise ValueError("all model curves must share the mean's grid")
        if not self.sigma.grid.matches(grid):
            raise ValueError("the noise-sd curve must share the mean's grid")
        if np.any(self.sigma.values < 0.0):
            raise ValueError("noise sd must be non-negative")

    @property
    def n_components(self) -> int:
        return len(self.xi)

    @property
    def grid(self) -> WavelengthGrid:
        return self.mu.grid


@dataclass(frozen=True, eq=False)
class MockRealization:
    """One generated spectrum: noisy samples, the noise-free continuum, scores."""

    noisy: RawSpectrum
    true_continuum: Curve
    omega: FloatArray


def generate(model: MockModel, count: int, seed: int) -> list[MockRealization]:
    """Draw ``count`` independent realizations.

    Component scores are normal with the model eigenvalues as variances; the
    pointwise noise is normal with the model's sd curve. Realization i uses
    the i-th child of the root seed, so a fixed seed reproduces the batch
    bitwise no matter how it is scheduled.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    grid = model.grid
    basis = np.stack([c.values for c in model.xi])
    out = []
    for child in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.default_rng(child)
        omega = rng.normal(0.0, np.sqrt(model.eigenvalues))
        continuum = model.mu.values + basis.T @ omega
        noisy = continuum + rng.normal(0.0, model.sigma.values)
        out.append(
            MockRealization(
                noisy=RawSpectrum(grid.points, noisy, model.sigma.values, 0.0),
                true_continuum=Curve(grid, continuum),
                omega=omega,
            )
        )
    return out


def synthetic_model(
    grid: WavelengthGrid,
    n_components: int = 10,
    eigenvalue_decay: float = 0.5,
    variance_scale: float = 2.5,
    noise_level: float = 0.05,
    seed: int = 0,
    normalization_wavelength: float = 1300.0,
) -> MockModel:
    """Build a self-contained mock model on the given full-range grid.

    The mean is normalized to 1 at the grid point nearest
    ``normalization_wavelength``; eigenvalues decay geometrically (the
    default rate puts the leading five components at roughly 97% of the
    total variance); the eigenspectra are seeded random-phase damped cosines
    made exactly orthonormal under the trapezoid inner product.
    """
    if n_components < 1:
        raise ValueError("n_components must be at least 1")
    if eigenvalue_decay <= 0.0:
        raise ValueError("eigenvalue_decay must be positive")
    if noise_level < 0.0:
        raise ValueError("noise_level must be non-negative")

    lam = grid.points
    t = (lam - lam[0]) / (lam[-1] - lam[0])
    mu = (lam / normalization_wavelength) ** _POWER_LAW_SLOPE
    for center, amp, width in _MEAN_BUMPS:
        mu = mu + amp * np.exp(-0.5 * ((lam - center) / width) ** 2)
    mu = mu / mu[nearest_index(grid, normalization_wavelength)]

    w = trapezoid_weights(lam)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, n_components)
    basis: list[FloatArray] = []
    for j in range(n_components):
        raw = (1.0 - 0.35 * t + 0.2 * t * t) * np.cos(math.pi * (j + 1) * t + phases[j])
        v = raw.copy()
        for b in basis:
            v = v - float(np.sum(w * v * b)) * b
        norm = math.sqrt(float(np.sum(w * v * v)))
        if norm < 1e-8:
            raise ValueError(
                f"cannot orthonormalize component {j + 1} on a {len(grid)}-point grid"
            )
        basis.append(v / norm)

    eigenvalues = variance_scale * eigenvalue_decay ** np.arange(n_components)
    edge = 2.0 * (lam - (lam[0] + lam[-1]) / 2.0) / (lam[-1] - lam[0])
    sigma = noise_level * (1.0 + _EDGE_NOISE_BOOST * edge * edge)

    return MockModel(
        mu=Curve(grid, mu),
        xi=tuple(Curve(grid, b) for b in basis),
        eigenvalues=eigenvalues,
        sigma=Curve(grid, sigma),
    )


def save_model(model: MockModel, directory) -> Path:
    """Write the model as one curve file per component plus a manifest.

    Returns the manifest path. Curve files reuse the spectrum text format
    with the flux column holding the component values.
    """
    from . import fileio

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fileio.write_curve(directory / "mean.csv", model.mu)
    fileio.write_curve(directory / "noise_sd.csv", model.sigma)
    components = []
    for j, (component, eigenvalue) in enumerate(zip(model.xi, model.eigenvalues), 1):
        name = f"component_{j:02d}.csv"
        fileio.write_curve(directory / name, component)
        components.append({"path": name, "eigenvalue": float(eigenvalue)})
    manifest = directory / "mock_model.json"
    fileio._dump_json(
        {
            "schema_version": fileio.SCHEMA_VERSION,
            "kind": "mock_model",
            "mean_path": "mean.csv",
            "sigma_path": "noise_sd.csv",
            "components": components,
        },
        manifest,
    )
    return manifest


def load_model(manifest_path) -> MockModel:
    """Load a mock model from its manifest, resampling onto the mean's grid."""
    from . import fileio

    manifest_path = Path(manifest_path)
    document = fileio._load_json(manifest_path, "mock_model")
    base = manifest_path.parent

    mu = fileio.read_curve(base / document["mean_path"])
    sigma = resample(fileio.read_curve(base / document["sigma_path"]), mu.grid)
    xi = []
    eigenvalues = []
    for index, entry in enumerate(document["components"], 1):
        if "eigenvalue" not in entry:
            raise ValueError(
                f"{manifest_path}: component {index} is missing its eigenvalue"
            )
        xi.append(resample(fileio.read_curve(base / entry["path"]), mu.grid))
        eigenvalues.append(float(entry["eigenvalue"]))
    return MockModel(mu=mu, xi=tuple(xi), eigenvalues=np.asarray(eigenvalues), sigma=sigma)
