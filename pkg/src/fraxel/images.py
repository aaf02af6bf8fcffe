"""Grayscale image IO, the 3-D surface embedding, and synthetic textures.

Images are 2-D uint8 arrays throughout the package. PGM files (both the
ASCII `P2` and binary `P5` flavors) are parsed directly; everything else
goes through Pillow. Color inputs are collapsed to luminance with the
ITU-R BT.601 weights.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DegenerateInputError, FormatError, ParameterError

_FACES = ("superior", "inferior")
_MANIFEST_FIELDS = ("path", "label", "sample_id", "face")


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) uint8 array to grayscale.

    Uses the BT.601 weights 0.299/0.587/0.114 with exact round-half-up,
    so luminance(100, 200, 50) = floor(153.0 + 0.5) = 153 regardless of
    platform rounding mode.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ParameterError("expected an (h, w, 3) array")
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    y = np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)
    return np.minimum(y, 255.0).astype(np.uint8)


def _parse_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError("not a PGM stream")

    # Header tokens (width, height, maxval) may be separated by arbitrary
    # whitespace and '#' comments that run to end of line.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise FormatError("truncated PGM header")
        c = data[pos : pos + 1]
        if c == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError("non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise FormatError("PGM dimensions must be positive")
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported PGM maxval {maxval}; need 1..255")

    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raster = data[pos : pos + n]
        if len(raster) < n:
            raise FormatError("truncated PGM raster")
        img = np.frombuffer(raster, dtype=np.uint8, count=n)
    else:
        body = b" ".join(
            line.split(b"#", 1)[0] for line in data[pos:].split(b"\n")
        )
        values = body.split()
        if len(values) < n:
            raise FormatError("truncated PGM raster")
        try:
            img = np.array(values[:n], dtype=np.int64)
        except ValueError as exc:
            raise FormatError("non-numeric PGM sample") from exc
        if img.min() < 0 or img.max() > maxval:
            raise FormatError("PGM sample outside 0..maxval")
        img = img.astype(np.uint8)
    return img.reshape(height, width)


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Load an image file as a 2-D uint8 array.

    PGM is handled natively; other formats go through Pillow. Color
    images are converted with luminance(); inputs deeper than 8 bits
    per channel are rejected.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] in (b"P2", b"P5"):
        return _parse_pgm(data)
    try:
        pil = Image.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:
        raise FormatError(f"cannot decode image file {path}: {exc}") from exc
    if pil.mode == "L":
        return np.asarray(pil, dtype=np.uint8)
    if pil.mode in ("1", "P", "LA", "RGB", "RGBA"):
        arr = np.asarray(pil.convert("RGB"), dtype=np.uint8)
        return luminance(arr)
    raise FormatError(f"unsupported image mode {pil.mode!r} in {path}")


def save_image(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write a 2-D uint8 array; `.pgm` paths get binary P5, the rest Pillow."""
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ParameterError("expected a 2-d uint8 image")
    if str(path).lower().endswith(".pgm"):
        h, w = img.shape
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(img.tobytes())
    else:
        Image.fromarray(img, mode="L").save(path)


@dataclass(frozen=True)
class Surface:
    """An image viewed as a set of 3-D lattice points.

    Pixel at 0-based (row, col) with intensity v becomes the point
    (row + 1, col + 1, v): spatial coordinates are 1-based, the
    intensity axis keeps its raw 0..255 value. `points` is an
    (height * width, 3) int64 array in row-major pixel order.
    """

    points: np.ndarray
    height: int
    width: int


def to_surface(img: np.ndarray) -> Surface:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ParameterError("expected a 2-d uint8 image")
    if img.size == 0:
        raise ParameterError("image must be non-empty")
    h, w = img.shape
    ii, jj = np.meshgrid(
        np.arange(1, h + 1, dtype=np.int64),
        np.arange(1, w + 1, dtype=np.int64),
        indexing="ij",
    )
    pts = np.column_stack(
        (ii.ravel(), jj.ravel(), img.astype(np.int64).ravel())
    )
    return Surface(points=pts, height=h, width=w)


def from_surface(surface: Surface) -> np.ndarray:
    """Invert to_surface(). Requires one point per pixel position."""
    pts = surface.points
    if pts.shape != (surface.height * surface.width, 3):
        raise ParameterError("surface does not cover the image grid")
    img = np.empty((surface.height, surface.width), dtype=np.uint8)
    rows = pts[:, 0] - 1
    cols = pts[:, 1] - 1
    if (
        rows.min() < 0
        or rows.max() >= surface.height
        or cols.min() < 0
        or cols.max() >= surface.width
    ):
        raise ParameterError("surface point outside the image grid")
    if pts[:, 2].min() < 0 or pts[:, 2].max() > 255:
        raise ParameterError("surface intensity outside 0..255")
    img[rows, cols] = pts[:, 2]
    return img


def synth_fbm(width: int, height: int, hurst: float, seed: int) -> np.ndarray:
    """Synthesize a fractional-Brownian-motion texture.

    Spectral synthesis: complex white Gaussian noise is shaped by the
    power law |f|^(-beta/2) with beta = 2 * hurst + 2, the DC term is
    zeroed, and the real part of the inverse FFT is linearly rescaled to
    span the full 0..255 range. Larger `hurst` gives smoother fields.
    The generator is seeded as (seed, 0) so synthesis never shares a
    stream with window sampling elsewhere in the package.
    """
    if width < 16 or height < 16:
        raise ParameterError("image dimensions must be at least 16")
    if not 0.0 < hurst < 1.0:
        raise ParameterError("hurst exponent must lie strictly in (0, 1)")
    if seed < 0:
        raise ParameterError("seed must be non-negative")

    rng = np.random.default_rng([seed, 0])
    beta = 2.0 * hurst + 2.0
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    f = np.hypot(fy, fx)
    amp = np.zeros_like(f)
    nz = f > 0
    amp[nz] = f[nz] ** (-beta / 2.0)
    noise = rng.normal(size=(height, width)) + 1j * rng.normal(
        size=(height, width)
    )
    field = np.real(np.fft.ifft2(noise * amp))
    lo = field.min()
    hi = field.max()
    if hi == lo:
        raise DegenerateInputError("synthesized field is constant")
    return np.floor((field - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)


@dataclass(frozen=True)
class ManifestEntry:
    """One corpus image: where it lives and what it is."""

    path: str
    label: str
    sample_id: str
    face: str


def load_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Read a corpus manifest CSV with columns path,label,sample_id,face.

    `face` must be 'superior' or 'inferior' and (sample_id, face) must be
    unique. Relative image paths are resolved against the manifest's own
    directory.
    """
    base = os.path.dirname(os.path.abspath(path))
    entries: list[ManifestEntry] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != _MANIFEST_FIELDS:
            raise FormatError(
                "manifest header must be exactly 'path,label,sample_id,face'"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"manifest line {lineno}: expected 4 fields")
            p, label, sample_id, face = (field.strip() for field in row)
            if not p or not label or not sample_id:
                raise FormatError(f"manifest line {lineno}: empty field")
            if face not in _FACES:
                raise FormatError(
                    f"manifest line {lineno}: face must be one of {_FACES}"
                )
            key = (sample_id, face)
            if key in seen:
                raise FormatError(
                    f"manifest line {lineno}: duplicate (sample_id, face) {key}"
                )
            seen.add(key)
            if not os.path.isabs(p):
                p = os.path.join(base, p)
            entries.append(ManifestEntry(p, label, sample_id, face))
    return entries


def save_manifest(path: str | os.PathLike, entries: list[ManifestEntry]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_MANIFEST_FIELDS)
        for e in entries:
            if e.face not in _FACES:
                raise ParameterError(f"face must be one of {_FACES}")
            writer.writerow([e.path, e.label, e.sample_id, e.face])
