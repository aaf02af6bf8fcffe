"""Orientation alignment and window sampling for corpus preparation.

Scanned textures arrive with a roughly vertical dominant axis; the
aligner fine-tunes that by probing rotations in [-45, 45] degrees and
keeping the one whose vertical projection (column sums, i.e. the Radon
projection onto the horizontal axis) has maximum variance. Analysis
windows are then sampled at random, without overlap, from the aligned
image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, ParameterError


@dataclass(frozen=True)
class WindowSet:
    """Pairwise-disjoint square crops and their top-left offsets."""

    windows: tuple[np.ndarray, ...]
    origins: tuple[tuple[int, int], ...]


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8 or img.size == 0:
        raise ParameterError("expected a non-empty 2-d uint8 image")
    return img


def radon_align(
    img: np.ndarray, angle_step: float = 1.0
) -> tuple[np.ndarray, float]:
    """Rotate the image so its dominant axis is vertical.

    Candidate angles form a symmetric grid over [-45, 45] degrees at
    `angle_step` (always including 0). For each candidate the image is
    rotated (bilinear, white background) and the variance of its column
    sums measured; the winning rotation is returned along with its
    angle. Ties prefer the smallest rotation, so an already-aligned
    image comes back unchanged with angle 0. Constant images have no
    dominant axis and raise DegenerateInputError.
    """
    img = _check_image(img)
    if not 0.0 < angle_step <= 5.0:
        raise ParameterError("angle_step must lie in (0, 5] degrees")
    if img.min() == img.max():
        raise DegenerateInputError("constant image has no dominant axis")

    steps = int(np.floor(45.0 / angle_step + 1e-9))
    candidates = [i * angle_step for i in range(-steps, steps + 1)]
    candidates.sort(key=lambda a: (abs(a), a))

    best_angle = 0.0
    best_var = -1.0
    best_img = img
    for angle in candidates:
        if angle == 0.0:
            rotated = img
        else:
            rotated = ndimage.rotate(
                img,
                angle,
                reshape=False,
                order=1,
                mode="constant",
                cval=255.0,
            )
        var = float(np.var(rotated.sum(axis=0, dtype=np.float64)))
        if var > best_var:
            best_var = var
            best_angle = angle
            best_img = rotated
    return best_img, best_angle


def _free_rejection_sample(
    rng, h: int, w: int, size: int, count: int, margin: int, limit: int
) -> list[tuple[int, int]]:
    origins: list[tuple[int, int]] = []
    rejections = 0
    while len(origins) < count and rejections < limit:
        r = int(rng.integers(margin, h - size - margin + 1))
        c = int(rng.integers(margin, w - size - margin + 1))
        if any(abs(r - r0) < size and abs(c - c0) < size for r0, c0 in origins):
            rejections += 1
        else:
            origins.append((r, c))
            rejections = 0
    return origins


def _grid_rejection_sample(
    rng, h: int, w: int, size: int, count: int, margin: int, limit: int
) -> list[tuple[int, int]]:
    # Candidates restricted to a size-pitch lattice (randomly offset
    # within the border slack) cannot jam: any subset is disjoint, so
    # only duplicate cells get rejected.
    rows = (h - 2 * margin) // size
    cols = (w - 2 * margin) // size
    base_r = margin + int(rng.integers(0, (h - 2 * margin) - rows * size + 1))
    base_c = margin + int(rng.integers(0, (w - 2 * margin) - cols * size + 1))
    origins: list[tuple[int, int]] = []
    seen: set[int] = set()
    rejections = 0
    while len(origins) < count and rejections < limit:
        cell = int(rng.integers(0, rows * cols))
        if cell in seen:
            rejections += 1
            continue
        seen.add(cell)
        rejections = 0
        origins.append(
            (base_r + (cell // cols) * size, base_c + (cell % cols) * size)
        )
    return origins


def extract_windows(
    img: np.ndarray, size: int, count: int, seed, margin: int = 0
) -> WindowSet:
    """Sample up to `count` pairwise-disjoint size x size windows.

    Seeded rejection sampling: candidate top-left corners are drawn
    uniformly at least `margin` pixels from every border and kept when
    they overlap no accepted window, giving up after 1000 * count
    consecutive rejections. Dense requests can jam that way well below
    a feasible packing (sequential adsorption of aligned squares stalls
    near 56% coverage), so when free sampling falls short but a
    size-pitch grid can still hold `count` windows, sampling restarts
    on that randomly offset grid, where rejection only ever discards
    duplicate cells. The result falls short of `count` only when both
    phases exhaust their rejection budget. Deterministic for a fixed
    seed; `seed` may be an int or a sequence of ints.
    """
    img = _check_image(img)
    if size < 1 or count < 1 or margin < 0:
        raise ParameterError("size and count must be >= 1, margin >= 0")
    h, w = img.shape
    if h < size + 2 * margin or w < size + 2 * margin:
        raise ParameterError(
            f"image {h}x{w} cannot hold a {size}x{size} window "
            f"with margin {margin}"
        )

    rng = np.random.default_rng(seed)
    limit = 1000 * count
    origins = _free_rejection_sample(rng, h, w, size, count, margin, limit)
    if len(origins) < count:
        rows = (h - 2 * margin) // size
        cols = (w - 2 * margin) // size
        if rows * cols >= count:
            origins = _grid_rejection_sample(
                rng, h, w, size, count, margin, limit
            )
    windows = tuple(
        img[r : r + size, c : c + size].copy() for r, c in origins
    )
    return WindowSet(windows=windows, origins=tuple(origins))
