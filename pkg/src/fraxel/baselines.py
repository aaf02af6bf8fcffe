"""Fourier and Gabor comparison descriptors.

Both are classical spectral texture features, reconstructed along
common practice so the proposed descriptors can be compared against
them on any corpus under identical post-processing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

DEFAULT_RINGS = 30
DEFAULT_GABOR_SCALES = 4
DEFAULT_GABOR_ORIENTATIONS = 6
DEFAULT_GABOR_FREQ_RANGE = (0.05, 0.4)


@dataclass(frozen=True)
class BaselineConfig:
    """Parameters of the two baseline descriptor banks."""

    fourier_rings: int = DEFAULT_RINGS
    gabor_scales: int = DEFAULT_GABOR_SCALES
    gabor_orientations: int = DEFAULT_GABOR_ORIENTATIONS
    gabor_freq_range: tuple[float, float] = DEFAULT_GABOR_FREQ_RANGE

    def __post_init__(self):
        if self.fourier_rings < 1:
            raise ParameterError("fourier_rings must be >= 1")
        if self.gabor_scales < 1 or self.gabor_orientations < 1:
            raise ParameterError("gabor bank needs >= 1 scale and orientation")
        low, high = self.gabor_freq_range
        if not 0.0 < low < high <= 0.5:
            raise ParameterError(
                "gabor_freq_range must satisfy 0 < low < high <= 0.5"
            )


def _check_square(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8 or img.size == 0:
        raise ParameterError("expected a non-empty 2-d uint8 image")
    if img.shape[0] != img.shape[1]:
        raise ParameterError("expected a square image")
    return img


def fourier_descriptors(img: np.ndarray, rings: int = DEFAULT_RINGS) -> np.ndarray:
    """Spectral energy in equal-width concentric rings.

    The centered magnitude spectrum is split into `rings` annuli of
    equal radial width spanning [0, corner radius]; each feature is the
    ring's share of the total energy outside the (excluded) DC term,
    so the vector sums to at most 1 and a constant image maps to zeros.
    """
    img = _check_square(img)
    if rings < 1:
        raise ParameterError("rings must be >= 1")
    n = img.shape[0]
    spectrum = np.fft.fftshift(np.fft.fft2(img.astype(np.float64)))
    energy = np.abs(spectrum) ** 2
    center = n // 2
    coords = np.arange(n, dtype=np.float64) - center
    radius = np.hypot(coords[:, None], coords[None, :])
    r_max = float(radius.max())
    dc = radius == 0.0
    total = float(energy[~dc].sum())
    if total <= 0.0:
        return np.zeros(rings, dtype=np.float64)
    idx = np.minimum(
        (radius / r_max * rings).astype(np.int64), rings - 1
    )
    sums = np.bincount(
        idx[~dc].ravel(), weights=energy[~dc].ravel(), minlength=rings
    )
    return sums / total


def gabor_descriptors(
    img: np.ndarray, cfg: BaselineConfig | None = None
) -> np.ndarray:
    """Mean and standard deviation of each Gabor response magnitude.

    The bank holds scales x orientations filters built directly in the
    frequency domain: a single Gaussian lobe of width sigma_f = f/2
    centered on the wave vector of length f at each orientation
    (orientation 0 points along columns, so it responds to vertical
    stripes). Center frequencies are geometric across freq_range,
    endpoints included. Features come scale-major as (mean, std) pairs:
    length 2 * scales * orientations.
    """
    img = _check_square(img)
    if cfg is None:
        cfg = BaselineConfig()
    n = img.shape[0]
    low, high = cfg.gabor_freq_range
    s_count = cfg.gabor_scales
    o_count = cfg.gabor_orientations
    if s_count == 1:
        freqs = [float(np.sqrt(low * high))]
    else:
        ratio = (high / low) ** (1.0 / (s_count - 1))
        freqs = [low * ratio**s for s in range(s_count)]

    fy = np.fft.fftfreq(n)[:, None]
    fx = np.fft.fftfreq(n)[None, :]
    spectrum = np.fft.fft2(img.astype(np.float64))
    features = np.empty(2 * s_count * o_count, dtype=np.float64)
    pos = 0
    for f in freqs:
        sigma = f / 2.0
        gauss_scale = 2.0 * sigma * sigma
        for o in range(o_count):
            theta = np.pi * o / o_count
            u0y = f * np.sin(theta)
            u0x = f * np.cos(theta)
            h = np.exp(-((fy - u0y) ** 2 + (fx - u0x) ** 2) / gauss_scale)
            response = np.abs(np.fft.ifft2(spectrum * h))
            features[pos] = float(response.mean())
            features[pos + 1] = float(response.std())
            pos += 2
    return features
