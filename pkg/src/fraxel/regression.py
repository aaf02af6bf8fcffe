"""Least-squares line fitting in log-log space.

Fractal dimensions in this package are all read off as the slope of a
straight line fitted to a log-log scaling curve, so the fit lives in one
place with one convention: natural logarithms, ordinary least squares
over the full curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class FitResult:
    """Ordinary least-squares line through (ln x, ln y) points."""

    slope: float
    intercept: float
    r_squared: float


def loglog_slope(x, y) -> FitResult:
    """Fit ln(y) = slope * ln(x) + intercept by ordinary least squares.

    `x` must be strictly increasing and positive; `y` must be positive.
    At least two points are required. When y is constant the fit is the
    horizontal line through it: slope 0 and, residuals being exactly
    zero, r_squared 1.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ParameterError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise ParameterError("need at least two points to fit a line")
    if not np.all(x > 0.0) or not np.all(y > 0.0):
        raise ParameterError("log-log fit requires positive x and y")
    if not np.all(np.diff(x) > 0.0):
        raise ParameterError("x must be strictly increasing")

    lx = np.log(x)
    ly = np.log(y)
    mx = lx.mean()
    my = ly.mean()
    dx = lx - mx
    dy = ly - my
    sxx = float(dx @ dx)
    # x strictly increasing guarantees sxx > 0
    slope = float(dx @ dy) / sxx
    intercept = my - slope * mx

    ss_tot = float(dy @ dy)
    if ss_tot == 0.0:
        # constant y: zero residual by definition
        return FitResult(0.0, my, 1.0)
    resid = ly - (slope * lx + intercept)
    r2 = 1.0 - float(resid @ resid) / ss_tot
    return FitResult(slope, intercept, float(min(max(r2, 0.0), 1.0)))
