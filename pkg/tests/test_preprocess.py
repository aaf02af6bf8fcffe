import numpy as np
import pytest
from scipy import ndimage

from fraxel.errors import DegenerateInputError, ParameterError
from fraxel.preprocess import extract_windows, radon_align


def _stripes(n=200, period=20):
    j = np.arange(n)
    row = np.where((j // period) % 2 == 0, 40, 220).astype(np.uint8)
    return np.tile(row, (n, 1))


def test_radon_recovers_known_rotation():
    img = _stripes()
    tilted = ndimage.rotate(
        img, 10.0, order=1, reshape=False, cval=255.0
    ).astype(np.uint8)
    aligned, angle = radon_align(tilted, angle_step=1.0)
    assert angle == -10.0
    assert aligned.shape == img.shape
    assert aligned.dtype == np.uint8


def test_radon_aligned_image_passes_through_unchanged():
    img = _stripes()
    aligned, angle = radon_align(img)
    assert angle == 0.0
    assert aligned is img


def test_radon_fractional_step():
    img = _stripes()
    tilted = ndimage.rotate(
        img, 2.5, order=1, reshape=False, cval=255.0
    ).astype(np.uint8)
    _, angle = radon_align(tilted, angle_step=0.5)
    assert angle == pytest.approx(-2.5, abs=0.5)


def test_radon_rejects_bad_input():
    with pytest.raises(DegenerateInputError):
        radon_align(np.full((32, 32), 7, dtype=np.uint8))
    img = _stripes(64)
    with pytest.raises(ParameterError):
        radon_align(img, angle_step=0.0)
    with pytest.raises(ParameterError):
        radon_align(img, angle_step=5.5)
    with pytest.raises(ParameterError):
        radon_align(img.astype(np.float64))


def _assert_disjoint(origins, size):
    for t, (r1, c1) in enumerate(origins):
        for r2, c2 in origins[t + 1 :]:
            assert abs(r1 - r2) >= size or abs(c1 - c2) >= size


def test_dense_window_request_always_fills():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(1000, 1000), dtype=np.uint8)
    for seed in range(1, 11):
        ws = extract_windows(img, size=200, count=20, seed=seed)
        assert len(ws.windows) == 20
        _assert_disjoint(ws.origins, 200)
        for r, c in ws.origins:
            assert 0 <= r <= 800 and 0 <= c <= 800
        for win, (r, c) in zip(ws.windows, ws.origins):
            assert win.shape == (200, 200)
            assert np.array_equal(win, img[r : r + 200, c : c + 200])


def test_sparse_window_request_is_not_grid_locked():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(1000, 1000), dtype=np.uint8)
    ws = extract_windows(img, size=50, count=3, seed=9)
    assert len(ws.windows) == 3
    offsets = [(r % 50, c % 50) for r, c in ws.origins]
    assert any(off != (0, 0) for off in offsets)


def test_exact_packing_uses_every_grid_cell():
    img = np.zeros((1000, 1000), dtype=np.uint8)
    ws = extract_windows(img, size=200, count=25, seed=2)
    assert sorted(ws.origins) == [
        (200 * a, 200 * b) for a in range(5) for b in range(5)
    ]


def test_window_margin_is_respected():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(400, 400), dtype=np.uint8)
    ws = extract_windows(img, size=64, count=8, seed=4, margin=30)
    assert len(ws.windows) == 8
    for r, c in ws.origins:
        assert 30 <= r <= 400 - 30 - 64
        assert 30 <= c <= 400 - 30 - 64


def test_single_window_image_is_forced_placement():
    img = np.arange(64 * 64, dtype=np.uint64).astype(np.uint8).reshape(64, 64)
    ws = extract_windows(img, size=64, count=1, seed=5)
    assert ws.origins == ((0, 0),)
    assert np.array_equal(ws.windows[0], img)


def test_infeasible_request_returns_short():
    img = np.zeros((10, 10), dtype=np.uint8)
    ws = extract_windows(img, size=4, count=5, seed=6)
    assert len(ws.windows) <= 4
    _assert_disjoint(ws.origins, 4)


def test_window_determinism_and_seed_sequences():
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, size=(500, 500), dtype=np.uint8)
    a = extract_windows(img, size=100, count=10, seed=[3, 1])
    b = extract_windows(img, size=100, count=10, seed=[3, 1])
    c = extract_windows(img, size=100, count=10, seed=[3, 2])
    assert a.origins == b.origins
    assert a.origins != c.origins


def test_window_parameter_validation():
    img = np.zeros((100, 100), dtype=np.uint8)
    with pytest.raises(ParameterError):
        extract_windows(img, size=101, count=1, seed=0)
    with pytest.raises(ParameterError):
        extract_windows(img, size=90, count=1, seed=0, margin=10)
    with pytest.raises(ParameterError):
        extract_windows(img, size=0, count=1, seed=0)
    with pytest.raises(ParameterError):
        extract_windows(img, size=10, count=0, seed=0)
    with pytest.raises(ParameterError):
        extract_windows(img, size=10, count=1, seed=0, margin=-1)
