import math

import numpy as np
import pytest

import oracles
from fraxel.errors import ParameterError, ResourceError
from fraxel.images import Surface, to_surface
from fraxel.minkowski import (
    DilationVolumeCurve,
    attainable_radii,
    bm_descriptors,
    bm_dimension,
    dilation_volumes,
    edt3d,
)


def _random_image(rng, max_side=8):
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)


def test_attainable_radii_match_naive_sieve():
    radii = attainable_radii(10.0)
    assert radii.size == 85
    expected = [
        math.sqrt(n)
        for n in range(1, 101)
        if oracles.sum_of_three_squares_naive(n)
    ]
    assert np.allclose(radii, expected)
    assert np.all(np.diff(radii) > 0)


def test_attainable_radii_exclude_forbidden_integers():
    ns = np.rint(attainable_radii(12.0) ** 2).astype(int)
    for bad in (7, 15, 23, 28, 31, 60, 112):
        assert bad not in ns
    for good in (1, 2, 3, 4, 5, 6, 8, 100):
        assert good in ns


def test_single_point_ball_volumes():
    surf = Surface(points=np.array([[1, 1, 128]], dtype=np.int64), height=1, width=1)
    curve = dilation_volumes(surf, r_max=2.0)
    assert np.rint(curve.radii**2).astype(int).tolist() == [1, 2, 3, 4]
    assert curve.volumes.tolist() == [7, 19, 27, 33]
    assert curve.volumes.tolist() == [oracles.lattice_ball_count(n) for n in (1, 2, 3, 4)]


def test_edt_exact_against_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(40):
        img = _random_image(rng)
        r_max = float(rng.integers(1, 6))
        surf = to_surface(img)
        field = edt3d(surf, r_max=r_max)
        pad = int(math.ceil(r_max))
        ref = oracles.brute_force_sqdist(surf.points, pad)
        assert field.sqdist.shape == ref.shape
        assert np.array_equal(field.sqdist.astype(np.int64), ref)


def test_edt_zero_set_is_exactly_the_surface():
    rng = np.random.default_rng(21)
    img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
    surf = to_surface(img)
    field = edt3d(surf, r_max=3.0)
    assert int((field.sqdist == 0).sum()) == surf.points.shape[0]
    origin = np.array(field.origin)
    for p in surf.points:
        i, j, k = (p - origin).astype(int)
        assert field.sqdist[i, j, k] == 0


def test_edt_grid_covers_dilation_radius():
    img = np.full((3, 3), 200, dtype=np.uint8)
    field = edt3d(to_surface(img), r_max=4.0)
    assert field.dims == (3 + 8, 3 + 8, 1 + 8)
    assert field.origin == (1 - 4, 1 - 4, 200 - 4)


def test_volume_curve_monotone_and_anchored():
    rng = np.random.default_rng(33)
    for _ in range(10):
        img = _random_image(rng)
        surf = to_surface(img)
        curve = dilation_volumes(surf, r_max=4.0)
        assert np.all(np.diff(curve.volumes) >= 0)
        assert curve.volumes[0] >= surf.points.shape[0]


def test_volumes_invariant_under_intensity_shift():
    rng = np.random.default_rng(8)
    img = rng.integers(40, 200, size=(6, 6), dtype=np.uint8)
    base = dilation_volumes(to_surface(img), r_max=5.0)
    shifted = dilation_volumes(to_surface(img + 30), r_max=5.0)
    assert np.array_equal(base.volumes, shifted.volumes)


def test_voxel_budget_enforced():
    img = np.zeros((50, 50), dtype=np.uint8)
    with pytest.raises(ResourceError):
        dilation_volumes(to_surface(img), r_max=10.0, voxel_budget=10_000)
    curve = dilation_volumes(to_surface(img), r_max=2.0, voxel_budget=10**6)
    assert curve.volumes[-1] > 0


def test_r_max_validation():
    surf = to_surface(np.zeros((3, 3), dtype=np.uint8))
    for bad in (0.5, 0.0, -2.0, float("nan"), float("inf")):
        with pytest.raises(ParameterError):
            dilation_volumes(surf, r_max=bad)
    with pytest.raises(ParameterError):
        attainable_radii(0.25)


def test_descriptors_are_log_volumes():
    surf = Surface(points=np.array([[1, 1, 0]], dtype=np.int64), height=1, width=1)
    curve = dilation_volumes(surf, r_max=2.0)
    desc = bm_descriptors(curve)
    assert np.allclose(desc, np.log([7, 19, 27, 33]))


def test_dimension_on_analytic_curves():
    r = attainable_radii(6.0)
    cubic = DilationVolumeCurve(radii=r, volumes=5.0 * r**3)
    assert bm_dimension(cubic) == pytest.approx(0.0, abs=1e-9)
    linear = DilationVolumeCurve(radii=r, volumes=2.0 * r)
    assert bm_dimension(linear) == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(ParameterError):
        bm_dimension(DilationVolumeCurve(radii=r[:1], volumes=r[:1]))


def test_dimension_of_flat_image_near_two():
    img = np.full((64, 64), 100, dtype=np.uint8)
    d = bm_dimension(dilation_volumes(to_surface(img), r_max=5.0))
    assert 1.7 < d < 2.4
