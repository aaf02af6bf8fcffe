"""Probability (Voss) dimension of the image surface.

The surface point set is covered by a fixed grid of axis-aligned cubes
of side delta, anchored at the spatial bounding-box corner with the
intensity axis binned from 0. For each delta the occupancy distribution
p_m is the probability that the cube holding a surface point holds
exactly m points in total, and the curve

    N_P(delta) = sum_m (1/m) p_m(delta)

decays as a power of delta whose log-log slope gives the dimension.
With p_m weighted per point, N_P reduces to the ratio of occupied cubes
to surface points, which keeps it within [1/N, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .images import Surface
from .regression import loglog_slope

DEFAULT_DELTAS = (2, 3, 4, 6, 8, 11, 16, 23, 32)


@dataclass(frozen=True)
class ProbabilityCurve:
    """Occupancy statistics of the cube grid at each side length.

    deltas: strictly increasing cube sides.
    information: N_P(delta) value for each delta.
    occupancy: for each delta, the sparse histogram {m: p_m}.
    """

    deltas: np.ndarray
    information: np.ndarray
    occupancy: tuple[dict[int, float], ...]


def probability_curve(surface: Surface, deltas) -> ProbabilityCurve:
    """Occupancy histograms and N_P values over a schedule of cube sides.

    Each delta must satisfy 2 <= delta <= max(height, width, 256) and the
    schedule must be strictly increasing. For every delta, sum_m p_m = 1
    exactly and 1/N <= N_P <= 1 with N = min(delta^3, |S|).
    """
    deltas = np.asarray(deltas, dtype=np.int64)
    if deltas.ndim != 1 or deltas.size == 0:
        raise ParameterError("deltas must be a non-empty 1-d integer list")
    if np.any(np.diff(deltas) <= 0):
        raise ParameterError("deltas must be strictly increasing")
    limit = max(surface.height, surface.width, 256)
    if deltas[0] < 2 or deltas[-1] > limit:
        raise ParameterError(f"each delta must lie in [2, {limit}]")

    pts = surface.points
    m_total = pts.shape[0]
    i0 = pts[:, 0].min()
    j0 = pts[:, 1].min()

    information = np.empty(deltas.size, dtype=np.float64)
    occupancy: list[dict[int, float]] = []
    for t, d in enumerate(deltas):
        ci = (pts[:, 0] - i0) // d
        cj = (pts[:, 1] - j0) // d
        ck = pts[:, 2] // d
        nj = cj.max() + 1
        nk = ck.max() + 1
        codes = (ci * nj + cj) * nk + ck
        _, per_cube = np.unique(codes, return_counts=True)
        hist: dict[int, float] = {}
        for m, c_m in zip(*np.unique(per_cube, return_counts=True)):
            hist[int(m)] = (int(m) * int(c_m)) / m_total
        occupancy.append(hist)
        information[t] = per_cube.size / m_total
    return ProbabilityCurve(
        deltas=deltas, information=information, occupancy=tuple(occupancy)
    )


def voss_descriptors(curve: ProbabilityCurve) -> np.ndarray:
    """Descriptor vector [ln N_P(delta_1), ..., ln N_P(delta_K)]."""
    if curve.deltas.size == 0:
        raise ParameterError("curve is empty")
    return np.log(curve.information)


def voss_dimension(curve: ProbabilityCurve) -> float:
    """Dimension estimate -d ln N_P / d ln delta over the full curve."""
    if curve.deltas.size < 2:
        raise ParameterError("need at least two deltas to fit a slope")
    fit = loglog_slope(
        curve.deltas.astype(np.float64), curve.information
    )
    return -fit.slope
