import math
from fractions import Fraction

import pytest

from hyperjac.errors import ConfigError, DomainError
from hyperjac.experiments.lemma410 import (
    coefficient_identity_holds,
    combined_coefficient,
    prop49_hypothesis,
    prop49_minor_integral,
    radial_integral_lemma410,
    radial_moment,
    sphere_area,
    wallis,
)
from hyperjac.signal import UnivariateSignal, radial_profile


def test_wallis_and_sphere_area():
    assert wallis(0) == pytest.approx(math.pi)
    assert wallis(1) == 2.0
    assert wallis(2) == pytest.approx(math.pi / 2)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)
    with pytest.raises(DomainError):
        sphere_area(1)


def test_coefficient_identity():
    assert combined_coefficient(3, 2, 2) == Fraction(-2, 3)
    for N, r, s in [(3, 2, 2), (4, 3, Fraction(1, 2)), (2, 2, 1)]:
        assert combined_coefficient(N, r, s) == -Fraction(s) / N
        assert coefficient_identity_holds(N, r, s)


def test_radial_moment_exact_and_fractional():
    h = UnivariateSignal.constant(1.0, 0.25, 0.75)
    assert radial_moment(h, 2) == pytest.approx((0.75**3 - 0.25**3) / 3)
    assert radial_moment(h, 0.5) == pytest.approx((0.75**1.5 - 0.25**1.5) / 1.5, rel=1e-12)


def test_radial_identity_in_three_dimensions():
    identity = radial_integral_lemma410(radial_profile(), 3, 2, 2)
    assert identity.coefficient == Fraction(-2, 3)
    assert identity.rhs == pytest.approx(identity.radial, rel=1e-9)
    first, second, third = identity.pieces
    assert first - second + third == pytest.approx(identity.rhs)
    assert abs(identity.ratio - 1.0) <= 0.02


def test_profile_must_have_zero_mean():
    with pytest.raises(ConfigError):
        radial_integral_lemma410(UnivariateSignal.constant(1.0, 0.25, 0.75), 3, 2, 2)


def test_prop49_minor_integral():
    h = radial_profile()
    value = prop49_hypothesis(h, 3, 2, 2)
    assert value == prop49_minor_integral(h, 3, 2, 2)
    assert value != 0.0
    corrected = prop49_minor_integral(h, 3, 2, 2, correction=0.5)
    assert corrected != value
