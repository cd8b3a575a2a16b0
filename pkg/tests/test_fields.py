import itertools
import math

import numpy as np
import pytest

from hyperjac.errors import DomainError
from hyperjac.fields import (
    MinorField,
    RadialField,
    SeparableField,
    VectorField,
    derivative_array,
    finite_difference_partial,
    hyper_jacobian,
    lemma25_expansion,
    leveled_minor_split,
    load_field,
    minor_field,
    radial_hessian_minor,
    scalar_minor_field,
)
from hyperjac.experiments.rates import fit_rate
from hyperjac.hypermatrix import HyperMatrix, MinorSpec, det_full, layer, minor, transpose
from hyperjac.multiindex import MultiIndex
from hyperjac.signal import UnivariateSignal, radial_profile

X = UnivariateSignal.monomial(1)
SQ = UnivariateSignal.monomial(2)


def sin(omega, phi=0):
    return UnivariateSignal.trig("sin", omega, phi)


def cos(omega):
    return UnivariateSignal.trig("cos", omega)


@pytest.fixture
def points():
    return np.random.default_rng(0).uniform(-1, 1, size=(40, 3))


@pytest.fixture
def u3():
    """(x1^2 sin(2 x2), cos(x1) x3 + x2, x1 x2 x3) on R^3."""
    return VectorField(
        [
            SeparableField.from_factors(3, {1: SQ, 2: sin(2)}),
            SeparableField.from_factors(3, {1: cos(1), 3: X}) + SeparableField.from_factors(3, {2: X}),
            SeparableField.from_factors(3, {1: X, 2: X, 3: X}, 0.5),
        ]
    )


def test_separable_evaluation_and_algebra(points):
    f = SeparableField.from_factors(3, {1: X, 2: sin(1)}, 2.0)
    g = SeparableField.constant(3, 1.5)
    x1, x2 = points[:, 0], points[:, 1]
    np.testing.assert_allclose(f(points), 2 * x1 * np.sin(x2))
    np.testing.assert_allclose((f * g)(points), 3 * x1 * np.sin(x2))
    np.testing.assert_allclose((f - f)(points), 0.0)
    assert (f - f).is_zero
    assert f + f == f.scaled(2.0)
    with pytest.raises(DomainError):
        f + SeparableField.constant(2)
    with pytest.raises(DomainError):
        f(points[:, :2])


def test_partials_commute(points):
    f = SeparableField.from_factors(3, {1: SQ, 2: sin(3), 3: cos(2)})
    assert f.partial((1, 2)) == f.partial((2, 1))
    x1, x2, x3 = points.T
    np.testing.assert_allclose(f.partial((1, 2))(points), 2 * x1 * 3 * np.cos(3 * x2) * np.cos(2 * x3), atol=1e-12)
    assert f.partial((1, 1, 1)).is_zero
    with pytest.raises(DomainError):
        f.partial((4,))


def test_extended_field():
    f = SeparableField.from_factors(2, {1: X})
    F = f.extended([SQ])
    assert F.dim == 3
    assert float(F(np.array([2.0, 7.0, 3.0]))) == pytest.approx(18.0)


def test_derivative_array_is_symmetric():
    v = SeparableField.from_factors(3, {1: SQ, 2: sin(1), 3: X})
    D = derivative_array(v, 2, [0.3, -0.2, 0.5])
    np.testing.assert_allclose(D.entries, D.entries.T)
    assert D[(1, 1)] == pytest.approx(2 * math.sin(-0.2) * 0.5)


def test_minor_field_matches_pointwise_determinants(u3, points):
    spec = MinorSpec.build((1, 3), [(2, 3), (1, 3)], 3, 3)
    mf = minor_field(u3, 2, spec)
    values = mf(points[:5])
    expanded = mf.expand()(points[:5])
    for x, value, other in zip(points[:5], values, expanded):
        direct = det_full(minor(hyper_jacobian(u3, 2, x), spec))
        assert value == pytest.approx(direct, abs=1e-12)
        assert other == pytest.approx(direct, abs=1e-12)


def test_minor_field_rejects_bad_specs(u3):
    with pytest.raises(DomainError):
        minor_field(u3, 1, MinorSpec.build((1, 2), [(1, 2), (1, 3)], 3, 3))
    with pytest.raises(DomainError):
        MinorField([u3[1], u3[2]], [MultiIndex((1,), 3)])


@pytest.mark.parametrize("m", [1, 2, 3])
def test_repeated_components(m, points):
    v = SeparableField.from_factors(3, {1: sin(2), 2: SQ}) + SeparableField.from_factors(3, {3: cos(1), 1: X})
    r = 2
    alphas = [MultiIndex((1, 3), 3)] * m
    spec = MinorSpec(MultiIndex.full(r), alphas)
    got = minor_field(VectorField([v] * r), m, spec)(points)
    expected = 2 * scalar_minor_field(v, m, alphas)(points) if m % 2 == 0 else 0.0
    np.testing.assert_allclose(got, expected, atol=1e-10)


@pytest.mark.parametrize("m,i", [(2, 1), (2, 2), (3, 2)])
def test_slot_expansion_matches_minor(u3, points, m, i):
    spec = MinorSpec.build((1, 2), [(1, 2), (2, 3), (1, 3)][:m], 3, 3)
    np.testing.assert_allclose(lemma25_expansion(u3, m, spec, i)(points), minor_field(u3, m, spec)(points), atol=1e-10)
    with pytest.raises(DomainError):
        lemma25_expansion(u3, m, spec, m + 1)


def test_leveled_split_is_exact():
    levels = [
        [SeparableField.from_factors(2, {1: sin(n)}, 1.0 / n) for n in (4, 32)],
        [SeparableField.from_factors(2, {1: sin(n, 1), 2: SQ}, 1.0 / n) for n in (4, 32)],
    ]
    alpha = MultiIndex((1, 2), 2)
    full, diagonal, off = leveled_minor_split(levels, (alpha,))
    pts = np.random.default_rng(1).uniform(0, 3, size=(20, 2))
    np.testing.assert_allclose(full(pts), (diagonal + off)(pts), atol=1e-12)
    assert not diagonal.is_zero and not off.is_zero


def test_radial_field_derivatives():
    g = RadialField(radial_profile(), 3)
    x = np.array([0.2, -0.25, 0.1])
    for axis in (1, 2, 3):
        fd = finite_difference_partial(g, (axis,), x, 1e-5)
        assert g.partial((axis,))(x) == pytest.approx(fd, abs=1e-7)
    for axes in [(1, 1), (1, 2), (2, 3)]:
        fd = finite_difference_partial(g, axes, x, 1e-4)
        assert g.partial(axes)(x) == pytest.approx(fd, abs=1e-5)
    with pytest.raises(DomainError):
        g.partial((1, 2, 3))


def test_radial_hessian_minor_matches_determinant():
    g = RadialField(radial_profile(), 3)
    pts = np.array([[0.2, -0.25, 0.1], [0.05, 0.3, -0.4], [0.5, 0.1, 0.2]])
    alpha = MultiIndex((1, 3), 3)
    batch = radial_hessian_minor(g, alpha, pts)
    for x, value in zip(pts, batch):
        H = g.hessian(x)
        direct = det_full(minor(H, MinorSpec(alpha, (alpha,))))
        assert value == pytest.approx(direct, abs=1e-10)
        assert radial_hessian_minor(g, alpha, x) == pytest.approx(direct, abs=1e-10)
    with pytest.raises(DomainError):
        radial_hessian_minor(g, alpha, np.zeros(3))


def test_radial_scaling():
    g = RadialField(radial_profile(), 2)
    eps, rho = 0.25, 0.5
    g_eps = g.scaled(eps, rho)
    pts = np.array([[0.05, 0.1], [0.1, -0.15], [0.3, 0.3]])
    np.testing.assert_allclose(g_eps(pts), eps**rho * g(pts / eps), atol=1e-9)
    with pytest.raises(DomainError):
        RadialField(UnivariateSignal.constant(1.0), 2)


def test_load_field(tmp_path, u3):
    from hyperjac.experiments.report import dumps

    path = tmp_path / "u.json"
    path.write_bytes(dumps(u3.to_dict()))
    loaded = load_field(path)
    assert isinstance(loaded, VectorField)
    assert loaded.components == u3.components
    bad = tmp_path / "bad.json"
    bad.write_text('{"sum": [{"coeff": 1.0}]}')
    with pytest.raises(DomainError):
        load_field(bad)


def test_finite_differences_converge_at_second_order():
    f = SeparableField.from_factors(2, {1: sin(3), 2: cos(2)}) + SeparableField.from_factors(2, {1: SQ, 2: sin(1)})
    g = RadialField(radial_profile(), 3)
    cases = [
        (f, (1,), [0.3, 0.7]),
        (f, (1, 2), [0.3, 0.7]),
        (g, (2,), [0.2, -0.25, 0.1]),
        (g, (1, 3), [0.2, -0.25, 0.1]),
    ]
    steps = [0.04, 0.02, 0.01, 0.005]
    for field, axes, x in cases:
        exact = float(field.partial(axes)(np.array(x)))
        errors = [abs(finite_difference_partial(field, axes, x, h) - exact) for h in steps]
        assert fit_rate(steps, errors).slope >= 1.8, (axes, errors)


def test_hyper_jacobian_of_repeated_bilinear_field():
    v = SeparableField.from_factors(2, {1: X, 2: X})
    A = hyper_jacobian(VectorField([v, v]), 2, [0.4, -1.3])
    assert A.orders == (2, 2, 2)
    for j in (1, 2):
        np.testing.assert_array_equal(layer(A, 1, j).entries, [[0.0, 1.0], [1.0, 0.0]])


def test_third_order_hyper_jacobian_is_symmetric():
    v = SeparableField.from_factors(3, {1: SQ, 2: X, 3: X})
    w = SeparableField.from_factors(3, {1: sin(1), 2: cos(2), 3: X})
    A = hyper_jacobian(VectorField([v, w]), 3, [1.0, 2.0, 3.0])
    for i, j in [(2, 3), (2, 4), (3, 4)]:
        np.testing.assert_array_equal(transpose(A, i, j).entries, A.entries)
    expected = {(0, 0, 1): 6.0, (0, 0, 2): 4.0, (0, 1, 2): 2.0}
    for idx in itertools.product(range(3), repeat=3):
        assert A.entries[(0,) + idx] == expected.get(tuple(sorted(idx)), 0.0)
