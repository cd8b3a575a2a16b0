import numpy as np
import pytest

from hyperjac.calculus import BoxDomain, QuadratureSpec, SobolevParams, gagliardo_seminorm, lp_norm
from hyperjac.experiments.families import FamilyConfig, build_sample
from hyperjac.experiments.runner import MINOR_SLOPE_TOL, family_row, run_family

KS = (8, 16, 32, 64, 128, 256)


def test_prop45_rates():
    cfg = FamilyConfig.build(family="prop45", N=2, m=2, r=2, rho="3/4", s="1/2", p=3, ks=KS)
    exp = run_family(cfg)
    assert [row["k"] for row in exp.rows] == list(KS)
    assert abs(exp.fits["minor_integral"]["slope"] - 0.5) <= MINOR_SLOPE_TOL
    assert exp.fits["norm"]["slope"] <= -0.15
    assert exp.verdicts["quadrature_agrees"]
    assert exp.passed


def test_case2_rate_and_vector_route():
    cfg = FamilyConfig.build(family="thm411case2", N=2, r=2, rho="0.6", s="0.5", p=3, ks=KS, norms=False)
    exp = run_family(cfg)
    assert exp.fits["minor_integral"]["slope"] == pytest.approx(0.8, abs=MINOR_SLOPE_TOL)
    assert exp.verdicts["vector_route_agrees"]
    assert "norm" not in exp.fits


def test_prop49_rate_in_eps():
    cfg = FamilyConfig.build(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2", ks=(4, 8, 16, 32, 64), norms=False)
    exp = run_family(cfg)
    assert exp.fits["minor_integral"]["variable"] == "eps"
    assert exp.fits["minor_integral"]["slope"] == pytest.approx(-1.0, abs=MINOR_SLOPE_TOL)
    assert exp.verdicts["minor_slope"]


@pytest.mark.parametrize(
    "values",
    [
        dict(family="prop47", N=2, m=2, r=2, s=1, p=3, ks=(2, 3)),
        dict(family="thm411case3", N=3, m=2, r=3, s=1, p=3, ks=(2, 3)),
    ],
)
def test_lacunary_structure(values):
    exp = run_family(FamilyConfig.build(**values))
    assert exp.verdicts["split_exact"]
    assert exp.verdicts["diagonal_dominates"]
    assert exp.verdicts["lacunary_ratio"] and exp.verdicts["lacunary_dyadic"]
    assert any("reduced-base" in note for note in exp.notes)
    assert "minor_integral" not in exp.fits


def test_rows_do_not_depend_on_workers():
    cfg = FamilyConfig.build(family="thm411case2", N=2, r=2, rho="0.6", s="0.5", p=3, ks=(8, 16, 32, 64), norms=False)
    assert run_family(cfg, workers=2).rows == run_family(cfg).rows


def test_row_records_window_guard():
    cfg = FamilyConfig.build(family="prop45", N=2, m=2, r=2, rho="3/4", s="1/2", p=3, ks=(8,))
    row = family_row(cfg, 8, QuadratureSpec())
    assert row["guard"].startswith("window half-width")
    assert row["norm"] > 0


def test_prop49_norm_rate_in_eps():
    cfg = FamilyConfig.build(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2", ks=(4, 8, 16, 32))
    exp = run_family(cfg)
    assert all(row["guard"].startswith("support window") for row in exp.rows)
    fit = exp.fits["norm"]
    assert fit["variable"] == "eps" and fit["predicted"] == 0.5
    # L^p part scales like eps, the seminorm like eps^(1/2)
    assert 0.45 <= fit["slope"] <= 1.05
    assert exp.verdicts["norm_slope"]


def test_prop49_norm_matches_repeated_components():
    cfg = FamilyConfig.build(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2", ks=(8,))
    spec = QuadratureSpec()
    row = family_row(cfg, 8, spec)
    sample = build_sample(cfg, 8)
    eps = sample.extras["eps"]
    window = BoxDomain.cube(-1.25 * eps, 1.25 * eps, cfg.N)

    def copies(pts):
        return np.stack([sample.u(pts)] * cfg.r, axis=-1)

    sp = SobolevParams(cfg.s, cfg.p)
    direct = lp_norm(copies, cfg.p, window, spec)
    direct += gagliardo_seminorm(copies, sp, sample.box, spec, window, extrapolate=False)
    assert row["norm"] == pytest.approx(direct, rel=1e-10)
