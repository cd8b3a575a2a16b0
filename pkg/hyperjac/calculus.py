"""Box integrals, Gauss-Legendre quadrature, Sobolev norms and the extension identity.

Separable integrands are integrated exactly; anything else goes through a
composite tensor Gauss-Legendre rule guarded by a nodes-per-wavelength check.
Fractional seminorms are double sums over a cell-centre pair grid that skips
pairs closer than one cell diagonal.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from .config import get_settings
from .errors import DomainError, ResolutionError
from .fields import SeparableField, VectorField, minor_field
from .hypermatrix import MinorSpec
from .multiindex import insert, remove, sigma
from .signal import UnivariateSignal, extension_profile

__all__ = [
    "BoxDomain",
    "SobolevParams",
    "QuadratureSpec",
    "SobolevNorm",
    "integrate_exact",
    "integrate_quadrature",
    "lp_norm",
    "gagliardo_seminorm",
    "sobolev_norm",
    "ibp_identity_check",
    "interpolation_ratio",
    "check_extension_profile",
]

logger = logging.getLogger(__name__)

# points per evaluation batch
_CHUNK = 65536
# rows of the pair grid handled per block
_PAIR_ROWS = 256


def _rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


@dataclass(frozen=True)
class BoxDomain:
    """Product of intervals (lo, hi), one per axis."""

    bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not bounds:
            raise DomainError("a box needs at least one axis")
        for axis, (lo, hi) in enumerate(bounds, start=1):
            if not lo < hi:
                raise DomainError(f"axis {axis} has empty interval ({lo}, {hi})")

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> "BoxDomain":
        return cls(((lo, hi),) * dim)

    @classmethod
    def centered(cls, centre: Sequence[float], half_width: float) -> "BoxDomain":
        return cls(tuple((c - half_width, c + half_width) for c in centre))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def widths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.bounds)

    @property
    def centre(self) -> Tuple[float, ...]:
        return tuple(0.5 * (lo + hi) for lo, hi in self.bounds)

    @property
    def volume(self) -> float:
        return math.prod(self.widths)

    def extended(self, bounds: Sequence[Tuple[float, float]]) -> "BoxDomain":
        return BoxDomain(self.bounds + tuple(bounds))

    def contains(self, other: "BoxDomain") -> bool:
        return other.dim == self.dim and all(
            lo <= a and b <= hi for (lo, hi), (a, b) in zip(self.bounds, other.bounds)
        )

    def to_dict(self) -> dict:
        return {"bounds": [list(b) for b in self.bounds]}


@dataclass(frozen=True)
class SobolevParams:
    """Smoothness s >= 0 and integrability p > 1, kept as exact rationals."""

    s: Fraction
    p: Fraction

    def __post_init__(self):
        s, p = _rational(self.s), _rational(self.p)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)
        if s < 0:
            raise DomainError(f"smoothness s must be non-negative, got {s}")
        if p <= 1:
            raise DomainError(f"integrability p must exceed 1, got {p}")

    @property
    def integer_part(self) -> int:
        return math.floor(self.s)

    @property
    def fractional_part(self) -> Fraction:
        return self.s - self.integer_part

    def __str__(self) -> str:
        return f"W^({self.s},{self.p})"


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule and pair-grid settings.

    Args:
        nodes: Gauss nodes per panel
        panels: panels per axis
        pair_grid: cells per axis of the Gagliardo grid in two dimensions
        min_nodes_per_wavelength: resolution guard
        exclusion: excluded pair radius in cell diagonals
    """

    nodes: int = 8
    panels: int = 8
    pair_grid: int = 48
    min_nodes_per_wavelength: int = 8
    exclusion: float = 1.0

    def __post_init__(self):
        if self.nodes < 2:
            raise DomainError(f"need at least 2 Gauss nodes, got {self.nodes}")
        if self.panels < 1 or self.pair_grid < 2:
            raise DomainError("panels and pair grid must be positive")
        if self.exclusion < 1.0:
            raise DomainError(f"exclusion radius must be at least one cell diagonal, got {self.exclusion}")

    @classmethod
    def from_settings(cls, **overrides) -> "QuadratureSpec":
        cfg = get_settings()
        values = dict(
            nodes=cfg.quad_nodes,
            panels=cfg.quad_panels,
            pair_grid=cfg.pair_grid,
            min_nodes_per_wavelength=cfg.min_nodes_per_wavelength,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def nodes_per_axis(self) -> int:
        return self.nodes * self.panels

    def pair_cells(self, dim: int) -> int:
        """Cells per axis keeping the 2-D pair count pair_grid^4 in any dimension."""
        return max(2, round(self.pair_grid ** (2.0 / dim)))


class SobolevNorm(NamedTuple):
    integer_part: float
    fractional_part: float

    @property
    def total(self) -> float:
        return self.integer_part + self.fractional_part


# --- quadrature -----------------------------------------------------------------


@lru_cache(maxsize=128)
def _axis_rule(lo: float, hi: float, nodes: int, panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    q, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (mid[:, None] + half[:, None] * q[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return xs, ws


def _check_resolution(field, box: BoxDomain, spec: QuadratureSpec) -> None:
    omega = float(getattr(field, "max_frequency", lambda: 0.0)())
    if omega <= 0:
        return
    for axis, width in enumerate(box.widths, start=1):
        wavelengths = width * omega / (2 * math.pi)
        required = math.ceil(spec.min_nodes_per_wavelength * wavelengths)
        if required > spec.nodes_per_axis:
            raise ResolutionError(required, spec.nodes_per_axis, axis)


def _tensor_sum(func: Callable[[np.ndarray], np.ndarray], rules: Sequence[Tuple[np.ndarray, np.ndarray]]) -> float:
    shape = tuple(len(x) for x, _ in rules)
    count = math.prod(shape)
    total = 0.0
    for start in range(0, count, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, count))
        digits = np.unravel_index(ids, shape)
        pts = np.stack([rules[a][0][d] for a, d in enumerate(digits)], axis=-1)
        weights = np.prod(np.stack([rules[a][1][d] for a, d in enumerate(digits)]), axis=0)
        total += float(np.dot(weights, func(pts)))
    return total


def integrate_exact(f: SeparableField, box: BoxDomain) -> float:
    """Sum over products of exact one-dimensional integrals."""
    if f.dim != box.dim:
        raise DomainError(f"field dimension {f.dim} does not match box dimension {box.dim}")
    total = 0.0
    for c, signals in f.products:
        total += c * math.prod(s.integrate(lo, hi) for s, (lo, hi) in zip(signals, box.bounds))
    return total


def integrate_quadrature(f, box: BoxDomain, spec: Optional[QuadratureSpec] = None) -> float:
    """Tensor Gauss-Legendre integral of any field evaluable on (P, N) point arrays."""
    spec = spec or QuadratureSpec.from_settings()
    _check_resolution(f, box, spec)
    rules = [_axis_rule(lo, hi, spec.nodes, spec.panels) for lo, hi in box.bounds]
    return _tensor_sum(lambda pts: np.asarray(f(pts), dtype=float), rules)


def _magnitude(values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """|u| pointwise; vector values (one more axis than a scalar field) use the Euclidean norm."""
    if values.ndim == pts.ndim:
        return np.sqrt(np.sum(values * values, axis=-1))
    return np.abs(values)


def lp_norm(u, p, box: BoxDomain, spec: Optional[QuadratureSpec] = None) -> float:
    spec = spec or QuadratureSpec.from_settings()
    _check_resolution(u, box, spec)
    p = float(p)
    rules = [_axis_rule(lo, hi, spec.nodes, spec.panels) for lo, hi in box.bounds]
    return _tensor_sum(lambda pts: _magnitude(np.asarray(u(pts)), pts) ** p, rules) ** (1.0 / p)


# --- fractional seminorms --------------------------------------------------------


def _pair_block(rows: np.ndarray, values: np.ndarray, centres: np.ndarray, start: int, p: float, power: float, cutoff: float) -> float:
    """Pair sum for a contiguous block of first points against the whole grid."""
    diff = centres[start : start + len(rows), None, :] - centres[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    jump = rows[:, None, ...] - values[None, ...]
    if jump.ndim == 3:
        jump = np.sqrt(np.sum(jump * jump, axis=-1))
    else:
        jump = np.abs(jump)
    keep = dist >= cutoff
    return float(np.sum(np.where(keep, jump**p / np.where(keep, dist, 1.0) ** power, 0.0)))


def gagliardo_seminorm(
    u,
    sp: SobolevParams,
    box: BoxDomain,
    spec: Optional[QuadratureSpec] = None,
    window: Optional[BoxDomain] = None,
    extrapolate: bool = True,
    workers: int = 1,
) -> float:
    """Double-integral seminorm of order frac(s) of ``u`` itself.

    Callers wanting |D^[s] u| pass the derivatives.  When ``window`` is given
    the pair grid lives there, and with ``extrapolate`` the p-th power is
    scaled by |box| / |window|.
    """
    sigma_ = sp.fractional_part
    if sigma_ == 0:
        raise DomainError(f"s = {sp.s} is an integer; use the integer norm instead")
    spec = spec or QuadratureSpec.from_settings()
    grid_box = window or box
    if window is not None and not box.contains(window):
        raise DomainError("the seminorm window must lie inside the box")
    N = grid_box.dim
    cells = spec.pair_cells(N)
    _check_resolution(u, grid_box, QuadratureSpec(nodes=cells, panels=1, min_nodes_per_wavelength=spec.min_nodes_per_wavelength))
    axes = [lo + (np.arange(cells) + 0.5) * (hi - lo) / cells for lo, hi in grid_box.bounds]
    centres = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    values = np.asarray(u(centres), dtype=float)
    cell = np.array(grid_box.widths) / cells
    volume = float(np.prod(cell))
    # the relative slack keeps neighbours that sit exactly one diagonal apart
    cutoff = spec.exclusion * float(np.sqrt(cell @ cell)) * (1 - 1e-9)
    p = float(sp.p)
    power = N + float(sigma_) * p
    starts = range(0, len(centres), _PAIR_ROWS)
    blocks = Parallel(n_jobs=workers)(
        delayed(_pair_block)(values[s : s + _PAIR_ROWS], values, centres, s, p, power, cutoff) for s in starts
    ) if workers > 1 else [
        _pair_block(values[s : s + _PAIR_ROWS], values, centres, s, p, power, cutoff) for s in starts
    ]
    total = 0.0
    for b in blocks:
        total += b
    total *= volume * volume
    if window is not None and extrapolate:
        total *= box.volume / window.volume
    return total ** (1.0 / p)


def _multisets(dim: int, order: int) -> List[Tuple[int, ...]]:
    return list(combinations_with_replacement(range(1, dim + 1), order))


def sobolev_norm(
    u,
    sp: SobolevParams,
    box: BoxDomain,
    spec: Optional[QuadratureSpec] = None,
    window: Optional[BoxDomain] = None,
    extrapolate: bool = True,
    workers: int = 1,
) -> SobolevNorm:
    """||u||_{W^[s],p} + sum over order-[s] partials of their frac(s) seminorms.

    Partials are taken over multisets of axes, each counted once.  With a
    window, L^p terms are integrated there too and scaled by (|box|/|window|)^(1/p).
    """
    spec = spec or QuadratureSpec.from_settings()
    domain = window or box
    scale = (box.volume / window.volume) ** (1.0 / float(sp.p)) if window is not None and extrapolate else 1.0
    integer = 0.0
    for order in range(sp.integer_part + 1):
        for axes in _multisets(domain.dim, order):
            integer += scale * lp_norm(u.partial(axes) if axes else u, sp.p, domain, spec)
    fractional = 0.0
    if sp.fractional_part:
        for axes in _multisets(domain.dim, sp.integer_part):
            du = u.partial(axes) if axes else u
            fractional += gagliardo_seminorm(du, sp, box, spec, window, extrapolate, workers)
    return SobolevNorm(integer, fractional)


def interpolation_ratio(
    f,
    target: SobolevParams,
    low: SobolevParams,
    high: SobolevParams,
    box: BoxDomain,
    spec: Optional[QuadratureSpec] = None,
    window: Optional[BoxDomain] = None,
) -> Tuple[float, Fraction]:
    """||f||_{s,p} / (||f||_{s1,p1}^theta ||f||_{s2,p2}^(1-theta)) with s = theta s1 + (1-theta) s2.

    Returns the ratio and theta; (s, p) must interpolate the two endpoints exactly.
    """
    if low.s != high.s:
        theta = (target.s - high.s) / (low.s - high.s)
    elif 1 / low.p != 1 / high.p:
        theta = (1 / target.p - 1 / high.p) / (1 / low.p - 1 / high.p)
    else:
        raise DomainError("interpolation endpoints coincide")
    if not 0 <= theta <= 1:
        raise DomainError(f"{target} is not between {low} and {high} (theta = {theta})")
    if theta * low.s + (1 - theta) * high.s != target.s or theta / low.p + (1 - theta) / high.p != 1 / target.p:
        raise DomainError(f"{target} is not an interpolation of {low} and {high}")
    norm = sobolev_norm(f, target, box, spec, window).total
    lo = sobolev_norm(f, low, box, spec, window).total
    hi = sobolev_norm(f, high, box, spec, window).total
    denominator = lo ** float(theta) * hi ** float(1 - theta)
    if denominator == 0:
        raise DomainError("interpolation endpoint norm vanishes")
    return norm / denominator, theta


# --- extension identity ----------------------------------------------------------


def check_extension_profile(chi: UnivariateSignal) -> None:
    """chi must equal 1 at 0 and vanish on a neighbourhood of 1."""
    lo, hi = chi.support()
    if chi.is_zero or lo > 0 or abs(float(chi(0.0)) - 1.0) > 1e-12:
        raise DomainError("extension profile must satisfy chi(0) = 1")
    if hi >= 1.0:
        raise DomainError(f"extension profile must vanish before 1, support ends at {hi}")


def ibp_identity_check(
    u: VectorField,
    psi: SeparableField,
    m: int,
    spec: MinorSpec,
    box: BoxDomain,
    chi: Optional[UnivariateSignal] = None,
) -> Tuple[float, float]:
    """Both sides of the extension identity for the minor of D^m u against psi.

    lhs = int_box M(D^m u) psi.  rhs extends u and psi by chi(t_1)...chi(t_m)
    to box x [0,1)^m, enlarges every alpha^s by the extra axis N+s, and sums
    (-1)^m prod_s sigma(alpha~^s - i_s, i_s) int M(D^m U; alpha~ - I) d_I Psi
    over every choice I = (i_1, ..., i_m), i_s in alpha~^s.
    """
    chi = chi if chi is not None else extension_profile(m)
    check_extension_profile(chi)
    N = u.dim
    if psi.dim != N or box.dim != N:
        raise DomainError(f"u, psi and box must share dimension {N}")
    lhs = integrate_exact(minor_field(u, m, spec).expand() * psi, box)

    factors = [chi] * m
    U, Psi = u.extended(factors), psi.extended(factors)
    big = box.extended([(0.0, 1.0)] * m)
    tilde = [insert(a.lift(N + m), N + s) for s, a in enumerate(spec.alphas, start=1)]
    rhs = 0.0
    for choice in product(*[t.entries for t in tilde]):
        sign = (-1) ** m * math.prod(sigma(remove(t, i), i) for t, i in zip(tilde, choice))
        reduced = MinorSpec(spec.beta, tuple(remove(t, i) for t, i in zip(tilde, choice)))
        integrand = minor_field(U, m, reduced).expand() * Psi.partial(choice)
        if integrand.is_zero:
            continue
        rhs += sign * integrate_exact(integrand, big)
    logger.debug("extension identity m=%d %s: lhs=%.6g rhs=%.6g", m, spec, lhs, rhs)
    return lhs, rhs
