import math

import numpy as np
import pytest

from fraxel.regression import FitResult, loglog_slope


def test_power_law_recovers_exponent_and_prefactor():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    y = 3.0 * x**2
    fit = loglog_slope(x, y)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_scaling_y_shifts_intercept_only():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = np.sort(rng.uniform(0.5, 50.0, size=12))
        x += np.arange(12) * 1e-6
        y = np.exp(rng.normal(size=12))
        base = loglog_slope(x, y)
        scaled = loglog_slope(x, 2.0 * y)
        assert scaled.slope == pytest.approx(base.slope, abs=1e-9)
        assert scaled.intercept == pytest.approx(base.intercept + math.log(2.0), abs=1e-9)
        assert scaled.r_squared == pytest.approx(base.r_squared, abs=1e-9)


def test_constant_y_is_flat_perfect_fit():
    fit = loglog_slope(np.array([1.0, 2.0, 3.0]), np.array([5.0, 5.0, 5.0]))
    assert fit == FitResult(0.0, math.log(5.0), 1.0)


def test_r_squared_stays_in_unit_interval():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        x = np.cumsum(rng.uniform(0.1, 1.0, size=n))
        y = rng.uniform(0.01, 100.0, size=n)
        fit = loglog_slope(x, y)
        assert 0.0 <= fit.r_squared <= 1.0
        assert math.isfinite(fit.slope) and math.isfinite(fit.intercept)


def test_rejects_bad_domains():
    from fraxel.errors import ParameterError

    with pytest.raises(ParameterError):
        loglog_slope(np.array([1.0]), np.array([1.0]))
    with pytest.raises(ParameterError):
        loglog_slope(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
    with pytest.raises(ParameterError):
        loglog_slope(np.array([-1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(ParameterError):
        loglog_slope(np.array([2.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ParameterError):
        loglog_slope(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ParameterError):
        loglog_slope(np.array([[1.0, 2.0]]), np.array([[1.0, 1.0]]))
