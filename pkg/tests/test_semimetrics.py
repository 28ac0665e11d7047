import numpy as np
import pytest

from specband.curves import Curve, WavelengthGrid
from specband.semimetrics import (
    SemimetricSpec,
    distance,
    distance_matrix,
    distances_to,
)

L2 = SemimetricSpec.l2()
D1 = SemimetricSpec.sobolev(1)
D2 = SemimetricSpec.sobolev(2)


def test_spec_validation():
    with pytest.raises(ValueError, match="order"):
        SemimetricSpec.sobolev(3)
    with pytest.raises(ValueError, match="unknown semimetric"):
        SemimetricSpec.parse("pca")
    assert SemimetricSpec.parse("deriv2").order == 2
    assert SemimetricSpec.parse("l2").token == "l2"
    assert D1.token == "deriv1"


@pytest.mark.parametrize("spec", [L2, D1, D2])
def test_identity_distance_is_zero(spec):
    grid = WavelengthGrid(np.linspace(1.0, 2.0, 30))
    a = Curve(grid, np.sin(grid.points))
    assert distance(spec, a, a) == 0.0


def test_l2_of_unit_offset_over_unit_interval():
    grid = WavelengthGrid(np.linspace(1.0, 2.0, 1001))
    a = Curve(grid, np.full(1001, 3.0))
    b = Curve(grid, np.full(1001, 2.0))
    assert distance(L2, a, b) == pytest.approx(1.0, abs=1e-9)


def test_derivative_semimetric_kills_constants():
    grid = WavelengthGrid(np.linspace(1.0, 5.0, 50))
    c = 2.7
    const = Curve(grid, np.full(50, c))
    zero = Curve(grid, np.zeros(50))
    assert distance(D1, const, zero) == pytest.approx(0.0, abs=1e-12)
    # while the plain L2 distance sees the constant
    assert distance(L2, const, zero) == pytest.approx(c * np.sqrt(4.0), rel=1e-9)


def test_symmetry_is_exact():
    rng = np.random.default_rng(3)
    grid = WavelengthGrid(np.sort(rng.uniform(1.0, 4.0, 40)))
    for spec in (L2, D1, D2):
        for _ in range(20):
            a = Curve(grid, rng.normal(size=40))
            b = Curve(grid, rng.normal(size=40))
            assert distance(spec, a, b) == distance(spec, b, a)


def test_l2_triangle_inequality():
    rng = np.random.default_rng(11)
    grid = WavelengthGrid(np.sort(rng.uniform(1.0, 3.0, 25)))
    for _ in range(100):
        a, b, c = (Curve(grid, rng.normal(size=25)) for _ in range(3))
        assert distance(L2, a, c) <= distance(L2, a, b) + distance(L2, b, c) + 1e-9


def test_l2_scale_equivariance():
    rng = np.random.default_rng(5)
    grid = WavelengthGrid(np.linspace(2.0, 7.0, 60))
    a = Curve(grid, rng.normal(size=60))
    b = Curve(grid, rng.normal(size=60))
    base = distance(L2, a, b)
    for s in (-3.5, 0.25, 7.0):
        scaled = distance(L2, a.with_values(s * a.values), b.with_values(s * b.values))
        assert scaled == pytest.approx(abs(s) * base, abs=1e-10 * max(1.0, abs(s) * base))


@pytest.mark.parametrize("spec", [D1, D2])
def test_sobolev_invariant_to_additive_constants(spec):
    rng = np.random.default_rng(9)
    grid = WavelengthGrid(np.linspace(1.0, 2.0, 80))
    a = Curve(grid, rng.normal(size=80))
    b = Curve(grid, rng.normal(size=80))
    base = distance(spec, a, b)
    shifted = distance(spec, a.with_values(a.values + 11.0), b)
    assert shifted == pytest.approx(base, abs=1e-10 * max(1.0, base))


def test_sobolev_needs_enough_points():
    grid = WavelengthGrid([1.0, 2.0, 3.0])
    a = Curve(grid, [0.0, 1.0, 0.0])
    with pytest.raises(ValueError, match="grid points"):
        distance(D2, a, a)


def test_grid_mismatch_raises():
    a = Curve(WavelengthGrid([1.0, 2.0]), [0.0, 1.0])
    b = Curve(WavelengthGrid([1.0, 3.0]), [0.0, 1.0])
    with pytest.raises(ValueError, match="different wavelength grids"):
        distance(L2, a, b)


@pytest.mark.parametrize("spec", [L2, D1, D2])
def test_matrix_and_vector_paths_agree_with_scalar(spec):
    rng = np.random.default_rng(21)
    pts = np.sort(rng.uniform(1.0, 6.0, 35))
    grid = WavelengthGrid(pts)
    rows = rng.normal(size=(4, 35))
    cols = rng.normal(size=(3, 35))
    mat = distance_matrix(spec, rows, cols, pts)
    for i in range(4):
        vec = distances_to(spec, cols, rows[i], pts)
        for j in range(3):
            scalar = distance(spec, Curve(grid, rows[i]), Curve(grid, cols[j]))
            assert mat[i, j] == pytest.approx(scalar, abs=1e-10)
            assert vec[j] == pytest.approx(scalar, abs=1e-12)
