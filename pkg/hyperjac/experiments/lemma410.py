"""Radial Hessian-minor integrals over the unit ball.

For g(x) = int_0^|x| h the minor M^alpha_alpha(D^2 g) averages over spheres to
h^r rho^-r (1 - r/N) + (r/N) h^(r-1) h' rho^(1-r); integrating the h' term by
parts against rho^(s+N-1) leaves the multiple (1 - r/N + (r-N-s)/N) = -s/N of
sphere_area(N) * int_0^1 h^r rho^(N+s-r-1).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import sympy

from ..calculus import BoxDomain, QuadratureSpec, integrate_quadrature
from ..errors import ConfigError, DomainError
from ..fields import RadialField, radial_hessian_minor
from ..multiindex import MultiIndex
from ..signal import UnivariateSignal

__all__ = [
    "RadialIdentity",
    "wallis",
    "sphere_area",
    "radial_moment",
    "radial_minor_integral",
    "combined_coefficient",
    "coefficient_identity_holds",
    "radial_integral_lemma410",
    "prop49_hypothesis",
    "prop49_minor_integral",
]

logger = logging.getLogger(__name__)

# Gauss nodes per piece for non-integer radial powers
_RADIAL_NODES = 40


@lru_cache(maxsize=None)
def wallis(i: int) -> float:
    """int_0^pi sin^i(theta) d theta."""
    if i < 0:
        raise DomainError(f"Wallis integral needs i >= 0, got {i}")
    if i == 0:
        return math.pi
    if i == 1:
        return 2.0
    return (i - 1) / i * wallis(i - 2)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N, 2 pi prod_{i=1}^{N-2} wallis(i)."""
    if N < 2:
        raise DomainError(f"sphere area needs N >= 2, got {N}")
    return 2 * math.pi * math.prod(wallis(i) for i in range(1, N - 1))


def radial_moment(h: UnivariateSignal, power) -> float:
    """int_0^1 h(rho) rho^power d rho; exact for non-negative integer powers."""
    power = float(power)
    if power >= 0 and power.is_integer():
        return (h * UnivariateSignal.monomial(int(power))).integrate(0.0, 1.0)
    q, w = np.polynomial.legendre.leggauss(_RADIAL_NODES)
    total = 0.0
    for piece in h.pieces:
        lo, hi = max(piece.lo, 0.0), min(piece.hi, 1.0)
        if lo >= hi:
            continue
        if lo == 0.0 and power < 0:
            raise DomainError(f"rho^{power} is not integrable against a profile reaching 0")
        xs = 0.5 * (hi - lo) * q + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * float(np.dot(w, h(xs) * xs**power))
    return total


def radial_minor_integral(h: UnivariateSignal, N: int, r: int, s) -> float:
    """int_B M^alpha_alpha(D^2 g) |x|^s through the one-dimensional reduction, before integrating by parts."""
    s = float(s)
    hr = h.power(r)
    slope_term = h.power(r - 1) * h.derivative()
    return sphere_area(N) * (
        (1 - r / N) * radial_moment(hr, s + N - 1 - r) + (r / N) * radial_moment(slope_term, s + N - r)
    )


def combined_coefficient(N: int, r: int, s) -> Fraction:
    s = Fraction(s)
    return 1 - Fraction(r, N) + (r - N - s) / N


def coefficient_identity_holds(N: int, r: int, s) -> bool:
    """1 - r/N + (r-N-s)/N == -s/N, exactly and as a symbolic identity."""
    exact = combined_coefficient(N, r, s) == -Fraction(s) / N
    n_, r_, s_ = sympy.symbols("N r s", positive=True)
    symbolic = sympy.simplify(1 - r_ / n_ + (r_ - n_ - s_) / n_ + s_ / n_) == 0
    return bool(exact and symbolic)


@dataclass(frozen=True)
class RadialIdentity:
    lhs: float
    rhs: float
    radial: float
    pieces: Tuple[float, float, float]
    coefficient: Fraction

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.nan

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "radial": self.radial,
            "pieces": list(self.pieces),
            "coefficient": str(self.coefficient),
            "ratio": self.ratio,
        }


def _check_profile(h: UnivariateSignal) -> None:
    total = h.integrate(0.0, 1.0)
    scale = max(1.0, max(abs(c.c) for p in h.pieces for c in p.terms)) if not h.is_zero else 1.0
    if abs(total) > 1e-12 * scale:
        raise ConfigError(f"radial profile must integrate to 0 over (0, 1), got {total:.3e}")


def radial_integral_lemma410(
    h: UnivariateSignal,
    N: int,
    r: int,
    s,
    spec: Optional[QuadratureSpec] = None,
    alpha: Optional[MultiIndex] = None,
) -> RadialIdentity:
    """Both sides of the radial minor identity.

    lhs is tensor Gauss quadrature of M^alpha_alpha(D^2 g)|x|^s over (-1, 1)^N;
    rhs assembles the three radial pieces I - II + III.
    """
    _check_profile(h)
    if not 1 <= r <= N:
        raise DomainError(f"degree r must lie in 1..{N}, got {r}")
    g = RadialField(h, N)
    alpha = alpha or MultiIndex(tuple(range(1, r + 1)), N)
    s_value = float(s)

    def integrand(pts: np.ndarray) -> np.ndarray:
        rad = np.sqrt(np.sum(pts * pts, axis=-1))
        out = np.zeros(rad.shape)
        inside = rad > 0
        out[inside] = radial_hessian_minor(g, alpha, pts[inside]) * rad[inside] ** s_value
        return out

    lhs = integrate_quadrature(integrand, BoxDomain.cube(-1.0, 1.0, N), spec)
    c = sphere_area(N)
    J = radial_moment(h.power(r), s_value + N - r - 1)
    first = c * J
    second = (r / N) * c * J
    third = ((r - N - s_value) / N) * c * J
    rhs = first - second + third
    result = RadialIdentity(lhs, rhs, radial_minor_integral(h, N, r, s), (first, second, third), combined_coefficient(N, r, s))
    logger.info("radial identity N=%d r=%d s=%s: lhs=%.6g rhs=%.6g", N, r, s, lhs, rhs)
    return result


def prop49_minor_integral(h: UnivariateSignal, N: int, r: int, m: int = 2, correction: float = 0.0) -> float:
    """int M(D^m u) psi for u = (g, ..., g) (r copies) and psi = |x|^m (1 + correction |x|).

    With m even each minor of the repeated field is r! times the Hessian minor of g.
    """
    value = radial_minor_integral(h, N, r, m)
    if correction:
        value += correction * radial_minor_integral(h, N, r, m + 1)
    return math.factorial(r) * value


def prop49_hypothesis(h: UnivariateSignal, N: int, r: int, m: int = 2, correction: float = 0.0) -> float:
    """The unscaled minor integral; must be clearly non-zero."""
    _check_profile(h)
    value = prop49_minor_integral(h, N, r, m, correction)
    grid = np.linspace(0.0, 1.0, 1001)
    scale = math.factorial(r) * sphere_area(N) * float(np.max(np.abs(h(grid)))) ** r
    if abs(value) < 1e-8 * scale:
        raise ConfigError(f"minor integral {value:.3e} is indistinguishable from 0 (scale {scale:.3e})")
    return value
