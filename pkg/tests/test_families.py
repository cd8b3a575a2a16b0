import math
from fractions import Fraction

import pytest

from hyperjac.calculus import QuadratureSpec, integrate_exact, integrate_quadrature
from hyperjac.errors import ConfigError, ResourceError
from hyperjac.experiments.families import (
    FamilyConfig,
    build_sample,
    check_lacunarity,
    lacunary_frequencies,
    parse_rational,
)


def test_parse_rational():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational(0.75) == Fraction(3, 4)
    assert parse_rational(" 2 ") == 2
    with pytest.raises(ValueError):
        parse_rational("abc")


def test_predicted_exponents():
    prop45 = FamilyConfig.build(family="prop45", N=2, m=2, r=2, rho="3/4", s="1/2", p=3)
    assert prop45.predicted_minor_exponent() == Fraction(1, 2)
    assert prop45.predicted_norm_exponent() == Fraction(-1, 4)
    case2 = FamilyConfig.build(family="thm411case2", N=2, r=2, rho="0.6", s="0.5", p=3)
    assert case2.predicted_minor_exponent() == Fraction(4, 5)


def test_prop49_rho_defaults_to_midpoint():
    cfg = FamilyConfig.build(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2")
    assert cfg.rho == -1
    assert cfg.predicted_minor_exponent() == -1
    assert cfg.predicted_norm_exponent() == Fraction(1, 2)


@pytest.mark.parametrize(
    "values",
    [
        dict(family="prop45", N=2, m=2, r=2, s="1/2", p=3),
        dict(family="prop45", N=2, m=2, r=2, rho="1.5", s="1/2", p=3),
        dict(family="prop45", N=2, m=2, r=3, rho="3/4"),
        dict(family="thm411case2", N=2, m=3, r=2, rho="0.6"),
        dict(family="prop47", N=2, r=2, s=1, ks=(1, 2)),
        dict(family="prop49", N=3, r=2, rho=0, s="1/2", p="3/2"),
        dict(family="prop45", N=2, rho="abc"),
        dict(family="nope"),
    ],
)
def test_invalid_configs(values):
    with pytest.raises(ConfigError):
        FamilyConfig.build(**values)


def test_lacunary_schedules():
    assert lacunary_frequencies("prop47", 3, 2, 2) == (24, 192, 1536)
    assert check_lacunarity((24, 192, 1536), 3, 2, 2) == {"ratio": True, "min_gap": True, "dyadic": True}
    assert lacunary_frequencies("prop47", 2, 2, 2, reduced=False) == (32, 256)
    assert not check_lacunarity((8, 12), 3, 2, 2)["min_gap"]
    with pytest.raises(ResourceError):
        lacunary_frequencies("prop47", 20, 2, 2, reduced=False)
    with pytest.raises(ResourceError):
        lacunary_frequencies("thm411case3", 2, 3, 2, reduced=False)


def test_prop45_sample_integrates_consistently():
    cfg = FamilyConfig.build(family="prop45", N=2, m=2, r=2, rho="3/4", s="1/2", p=3)
    sample = build_sample(cfg, 8)
    integrand = sample.minor * sample.psi
    exact = integrate_exact(integrand, sample.box)
    spec = QuadratureSpec(nodes=8, panels=16)
    assert integrate_quadrature(integrand, sample.box, spec) == pytest.approx(exact, rel=1e-6)
    assert exact != 0.0


def test_case2_scalar_and_vector_routes_agree():
    cfg = FamilyConfig.build(family="thm411case2", N=2, r=2, rho="0.6", s="0.5", p=3)
    sample = build_sample(cfg, 8)
    direct = integrate_exact(sample.minor * sample.psi, sample.box)
    via_copies = integrate_exact(sample.extras["vector_route"] * sample.psi, sample.box)
    assert via_copies == pytest.approx(direct, rel=1e-9)


def test_prop47_split_is_exact():
    cfg = FamilyConfig.build(family="prop47", N=2, m=2, r=2, s=1, p=3, ks=(2, 3))
    sample = build_sample(cfg, 3)
    full, diagonal, off = sample.split
    assert sample.frequencies == (24, 192, 1536)
    rest = full - (diagonal + off)
    scale = max(abs(c) for c, _ in full.products)
    assert max((abs(c) for c, _ in rest.products), default=0.0) <= 1e-12 * scale
    assert sample.prefactor == pytest.approx(math.log(3) ** -0.5)


def test_prop49_sample_is_scaled_radial_field():
    cfg = FamilyConfig.build(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2")
    sample = build_sample(cfg, 4)
    assert sample.extras["eps"] == 0.25
    assert sample.u.profile.support() == pytest.approx((0.125 / 4, 0.875 / 4))
