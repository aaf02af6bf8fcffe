"""Bouligand-Minkowski dilation volumes over the image surface.

The image is embedded as a 3-D lattice point set (see images.to_surface)
and dilated by spheres of growing radius. The voxel count V(r) of the
dilated set follows a power law whose log-log slope encodes a fractal
dimension; the sequence ln V(r) itself is the multiscale descriptor
vector.

V(r) is obtained exactly: a separable lower-envelope pass per axis
(Felzenszwalb & Huttenlocher) yields the exact squared Euclidean
distance from every voxel of a padded bounding volume to the nearest
surface point, all in integer arithmetic, and V(r) is the count of
voxels with squared distance at most r^2. Useful radii are exactly the
square roots of integers expressible as a sum of three squares, i.e.
those not of the form 4^a (8b + 7) (Legendre).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ParameterError, ResourceError
from .images import Surface
from .regression import loglog_slope

DEFAULT_R_MAX = 10.0
DEFAULT_VOXEL_BUDGET = 2**31

# Sentinel for "no point anywhere in this line"; must survive the later
# passes without overflowing int32 (2^30 + max finite offset^2 < 2^31).
_INF = np.int32(2**30)


@njit(cache=True, nogil=True)
def _binary_axis2(vol):
    # 1-D squared distance along the intensity axis. On entry, voxels
    # holding a surface point are 0 and all others non-zero; on exit
    # every voxel holds the squared axis-2 distance to the nearest
    # point in its own (i, j) line, or _INF when the line is empty.
    ni, nj, nk = vol.shape
    for i in range(ni):
        for j in range(nj):
            d = nk + 1
            for k in range(nk):
                d = 0 if vol[i, j, k] == 0 else d + 1
                vol[i, j, k] = d if d <= nk else nk + 1
            d = nk + 1
            for k in range(nk - 1, -1, -1):
                cur = vol[i, j, k]
                d = 0 if cur == 0 else d + 1
                m = cur if cur < d else d
                vol[i, j, k] = m * m if m <= nk else _INF


@njit(cache=True, nogil=True, inline="always")
def _envelope(f, dd, v, z, length):
    # Lower envelope of the parabolas q -> (x - q)^2 + f[q]. All f are
    # integers < 2^31, so every breakpoint s is a rational with a small
    # denominator; float64 evaluates it closer than the spacing between
    # distinct breakpoints, keeping the integer output exact.
    k = 0
    v[0] = 0
    z[0] = -1e30
    z[1] = 1e30
    for q in range(1, length):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (
                2.0 * (q - v[k])
            )
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = 1e30
    k = 0
    for q in range(length):
        while z[k + 1] < q:
            k += 1
        dq = q - v[k]
        dd[q] = dq * dq + f[v[k]]


@njit(cache=True, nogil=True)
def _pass_axis1(vol):
    ni, nj, nk = vol.shape
    f = np.empty(nj, np.int64)
    dd = np.empty(nj, np.int64)
    v = np.empty(nj, np.int64)
    z = np.empty(nj + 1, np.float64)
    for i in range(ni):
        for k in range(nk):
            for j in range(nj):
                f[j] = vol[i, j, k]
            _envelope(f, dd, v, z, nj)
            for j in range(nj):
                vol[i, j, k] = dd[j]


@njit(cache=True, nogil=True)
def _pass_axis0(vol):
    ni, nj, nk = vol.shape
    f = np.empty(ni, np.int64)
    dd = np.empty(ni, np.int64)
    v = np.empty(ni, np.int64)
    z = np.empty(ni + 1, np.float64)
    for j in range(nj):
        for k in range(nk):
            for i in range(ni):
                f[i] = vol[i, j, k]
            _envelope(f, dd, v, z, ni)
            for i in range(ni):
                vol[i, j, k] = dd[i]


@dataclass(frozen=True)
class DistanceField:
    """Exact squared Euclidean distances on a padded voxel grid.

    dims: grid extents; origin: coordinates of voxel (0, 0, 0), so a
    point with coordinates p sits at index p - origin; sqdist[x] is the
    squared distance from voxel x to the nearest surface point.
    """

    dims: tuple[int, int, int]
    origin: tuple[int, int, int]
    sqdist: np.ndarray


def _check_r_max(r_max: float) -> int:
    """Validate r_max and return floor(r_max^2) as an int."""
    if not (isinstance(r_max, (int, float)) and math.isfinite(r_max)):
        raise ParameterError("r_max must be a finite number")
    if r_max < 1.0:
        raise ParameterError("r_max must be at least 1")
    return int(math.floor(r_max * r_max + 1e-9))


def edt3d(
    surface: Surface,
    r_max: float = DEFAULT_R_MAX,
    voxel_budget: int = DEFAULT_VOXEL_BUDGET,
) -> DistanceField:
    """Exact squared EDT of the surface over its bounding box padded by
    ceil(r_max) voxels on every face.

    Raises ResourceError when the padded volume would exceed
    `voxel_budget` voxels.
    """
    _check_r_max(r_max)
    pad = int(math.ceil(r_max - 1e-9))
    pts = surface.points
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
        raise ParameterError("surface must contain at least one 3-d point")
    mins = pts.min(axis=0)
    maxs = pts.max(axis=0)
    dims = maxs - mins + 1 + 2 * pad
    if int(dims[0]) * int(dims[1]) * int(dims[2]) > voxel_budget:
        raise ResourceError(
            f"distance volume {dims[0]}x{dims[1]}x{dims[2]} exceeds the "
            f"budget of {voxel_budget} voxels"
        )
    vol = np.ones((int(dims[0]), int(dims[1]), int(dims[2])), dtype=np.int32)
    idx = pts - mins + pad
    vol[idx[:, 0], idx[:, 1], idx[:, 2]] = 0
    _binary_axis2(vol)
    _pass_axis1(vol)
    _pass_axis0(vol)
    return DistanceField(
        dims=(int(dims[0]), int(dims[1]), int(dims[2])),
        origin=(int(mins[0] - pad), int(mins[1] - pad), int(mins[2] - pad)),
        sqdist=vol,
    )


def _sum_of_three_squares(n: int) -> bool:
    while n % 4 == 0:
        n //= 4
    return n % 8 != 7


def attainable_radii(r_max: float = DEFAULT_R_MAX) -> np.ndarray:
    """All dilation radii 0 < r <= r_max that a cubic lattice realizes.

    These are sqrt(n) for integers n >= 1 expressible as a sum of three
    squares. r_max = 10 yields 85 radii.
    """
    n_max = _check_r_max(r_max)
    ns = [n for n in range(1, n_max + 1) if _sum_of_three_squares(n)]
    return np.sqrt(np.array(ns, dtype=np.float64))


@dataclass(frozen=True)
class DilationVolumeCurve:
    """Dilated-set volume at every attainable radius.

    radii: strictly increasing, each with integer square; volumes:
    voxel counts V(r), positive and non-decreasing.
    """

    radii: np.ndarray
    volumes: np.ndarray


def dilation_volumes(
    surface: Surface,
    r_max: float = DEFAULT_R_MAX,
    voxel_budget: int = DEFAULT_VOXEL_BUDGET,
) -> DilationVolumeCurve:
    """V(r) at every attainable radius r <= r_max.

    volumes[t] counts the voxels whose squared distance to the surface
    is <= radii[t]^2, inside the bounding box padded by ceil(r_max) so
    no dilation is clipped.
    """
    n_max = _check_r_max(r_max)
    field = edt3d(surface, r_max, voxel_budget)
    counts = np.bincount(
        field.sqdist[field.sqdist <= n_max].ravel(), minlength=n_max + 1
    )
    cum = np.cumsum(counts, dtype=np.int64)
    ns = np.array(
        [n for n in range(1, n_max + 1) if _sum_of_three_squares(n)],
        dtype=np.int64,
    )
    return DilationVolumeCurve(
        radii=np.sqrt(ns.astype(np.float64)), volumes=cum[ns]
    )


def bm_descriptors(curve: DilationVolumeCurve) -> np.ndarray:
    """Descriptor vector [ln V(r_1), ..., ln V(r_K)] over the curve."""
    if curve.radii.size == 0:
        raise ParameterError("curve is empty")
    return np.log(curve.volumes.astype(np.float64))


def bm_dimension(curve: DilationVolumeCurve) -> float:
    """Dimension estimate 3 - d ln V / d ln r over the full curve."""
    if curve.radii.size < 2:
        raise ParameterError("need at least two radii to fit a slope")
    fit = loglog_slope(curve.radii, curve.volumes.astype(np.float64))
    return 3.0 - fit.slope
