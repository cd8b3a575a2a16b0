import math
from fractions import Fraction

import numpy as np
import pytest

from hyperjac.errors import DomainError
from hyperjac.signal import (
    Piece,
    SignalPayload,
    Term,
    UnivariateSignal,
    alternative_extension_profile,
    extension_profile,
    plateau_bump,
    radial_profile,
    smoothstep_coefficients,
)

xs = np.linspace(-2.0, 4.0, 97)


def test_exact_integrals():
    assert UnivariateSignal.trig("sin", 1.0).integrate(0, math.pi) == pytest.approx(2.0, abs=1e-14)
    x_cos = UnivariateSignal.trig("cos", 1.0, a=1)
    assert x_cos.integrate(0, math.pi) == pytest.approx(-2.0, abs=1e-13)
    assert UnivariateSignal.monomial(2).integrate(0, 3) == pytest.approx(9.0)
    assert UnivariateSignal.monomial(2).integrate(3, 0) == pytest.approx(-9.0)


def test_high_frequency_square_integrates_exactly():
    s = UnivariateSignal.trig("sin", 1000.0)
    assert (s * s).integrate(0, math.pi) == pytest.approx(math.pi / 2, abs=1e-12)


def test_phase_quarter_turn_normalizes():
    assert UnivariateSignal.trig("sin", 2.0, Fraction(1, 2)) == UnivariateSignal.trig("cos", 2.0)
    assert UnivariateSignal.trig("cos", -3.0) == UnivariateSignal.trig("cos", 3.0)
    assert UnivariateSignal.trig("sin", -3.0) == UnivariateSignal.trig("sin", 3.0, c=-1.0)


def test_algebra_matches_pointwise_values():
    f = UnivariateSignal.trig("sin", 3.0, a=2)
    g = UnivariateSignal.polynomial([1.0, -2.0], lo=0.0, hi=2.0)
    x = xs
    np.testing.assert_allclose((f * g)(x), f(x) * g(x), atol=1e-12)
    np.testing.assert_allclose((f + g)(x), f(x) + g(x), atol=1e-12)
    np.testing.assert_allclose((f - g)(x), f(x) - g(x), atol=1e-12)
    np.testing.assert_allclose(g.power(3)(x), g(x) ** 3, atol=1e-12)


def test_derivative_of_poly_trig():
    f = UnivariateSignal.trig("sin", 3.0, a=2)
    expected = 2 * xs * np.sin(3 * xs) + 3 * xs**2 * np.cos(3 * xs)
    np.testing.assert_allclose(f.derivative()(xs), expected, atol=1e-12)
    assert UnivariateSignal.monomial(3).derivative(4).is_zero


def test_rescaled_and_cumulative():
    f = UnivariateSignal.trig("cos", 2.0, a=1, lo=0.0, hi=3.0)
    np.testing.assert_allclose(f.rescaled(2.0)(xs), f(xs / 2.0), atol=1e-12)
    points = np.array([-1.0, 0.5, 1.7, 3.5])
    expected = [f.integrate(0.0, x) for x in points]
    np.testing.assert_allclose(f.cumulative(points), expected, atol=1e-12)
    with pytest.raises(DomainError):
        f.rescaled(0.0)


def test_normalized_splits_lead():
    f = UnivariateSignal.trig("sin", 2.0, c=-3.0)
    lead, shape = f.normalized()
    assert lead == -3.0
    assert shape == UnivariateSignal.trig("sin", 2.0)


def test_overlapping_pieces_rejected():
    t = (Term(1.0, 0, "one", 0.0, Fraction(0)),)
    with pytest.raises(DomainError):
        UnivariateSignal([Piece(0.0, 2.0, t), Piece(1.0, 3.0, t)])
    with pytest.raises(DomainError):
        UnivariateSignal.trig("tan", 1.0)


def test_payload_roundtrip():
    f = UnivariateSignal.trig("sin", 2.0, Fraction(1, 3), c=0.5, a=1, lo=0.0) + UnivariateSignal.constant(2.0)
    assert UnivariateSignal.from_payload(SignalPayload.model_validate(f.to_dict())) == f
    assert f.to_dict()["pieces"][0]["lo"] is None


def test_smoothstep_ramp():
    assert smoothstep_coefficients(1) == (0, 0, 3, -2)
    assert sum(smoothstep_coefficients(3)) == 1


def test_plateau_bump_shape():
    bump = plateau_bump(2)
    assert bump(math.pi / 2) == pytest.approx(1.0)
    assert bump(0.1) == 0.0
    assert bump(3.0) == 0.0
    lo, hi = bump.support()
    assert (lo, hi) == pytest.approx((math.pi / 8, 7 * math.pi / 8))
    # continuous with continuous first derivative at the ramp ends
    for edge in (math.pi / 8, math.pi / 4, 3 * math.pi / 4, 7 * math.pi / 8):
        for f in (bump, bump.derivative()):
            assert f(edge - 1e-9) == pytest.approx(f(edge + 1e-9), abs=1e-6)


@pytest.mark.parametrize("chi", [extension_profile(2), alternative_extension_profile(2)])
def test_extension_profiles(chi):
    assert chi(0.0) == pytest.approx(1.0)
    assert chi.support()[1] < 1.0
    assert chi(0.9) == 0.0


def test_radial_profile_has_zero_mean():
    h = radial_profile()
    assert h.integrate(0.0, 1.0) == pytest.approx(0.0, abs=1e-9)
    assert h(0.3) > 0 > h(0.7)
    assert h.support() == (0.125, 0.875)
