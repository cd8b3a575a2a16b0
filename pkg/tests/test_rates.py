import numpy as np
import pytest

from hyperjac.errors import DataError
from hyperjac.experiments.rates import fit_rate


def test_exact_power_law():
    ks = [8, 16, 32, 64, 128]
    fit = fit_rate(ks, [3.0 * k**-1.5 for k in ks])
    assert fit.slope == pytest.approx(-1.5)
    assert 2**fit.intercept == pytest.approx(3.0)
    assert fit.max_residual < 1e-12


def test_sign_is_ignored_and_tiny_values_dropped():
    ks = [2, 4, 8, 16, 32]
    values = [-(k**0.5) for k in ks]
    values[2] = 1e-15
    fit = fit_rate(ks, values)
    assert fit.xs == (2.0, 4.0, 16.0, 32.0)
    assert fit.slope == pytest.approx(0.5)


def test_too_few_points():
    with pytest.raises(DataError):
        fit_rate([1, 2, 3], [1.0, 2.0, 3.0])
    with pytest.raises(DataError):
        fit_rate([1, 2, 3, 4, 5], [1.0, 0.0, 0.0, 0.0, np.nan])
    with pytest.raises(DataError):
        fit_rate([2, 2, 2, 2], [1.0, 2.0, 3.0, 4.0])
