"""Exact fields and their hyper-Jacobian minors.

A SeparableField is a sum of products coeff * f_1(x_1) * ... * f_N(x_N) of
UnivariateSignals; its partials and box integrals are exact.  A RadialField
is g(x) = int_0^|x| h, with closed-form gradient and Hessian.  Axes are
1-based throughout.
"""

import logging
import math
from functools import lru_cache
from itertools import combinations_with_replacement, product
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
from pydantic import BaseModel, ValidationError

from .errors import DomainError
from .hypermatrix import HyperMatrix, MinorSpec, det_full_batch
from .multiindex import MultiIndex, signed_permutations
from .signal import SignalPayload, UnivariateSignal

__all__ = [
    "SeparableField",
    "VectorField",
    "RadialField",
    "MinorField",
    "partial",
    "hyper_jacobian",
    "derivative_array",
    "minor_field",
    "scalar_minor_field",
    "lemma25_expansion",
    "leveled_minor_split",
    "radial_hessian_minor",
    "finite_difference_partial",
    "load_field",
]

logger = logging.getLogger(__name__)

Product = Tuple[float, Tuple[UnivariateSignal, ...]]

_ONE = UnivariateSignal.constant(1.0)


class SeparableField:
    """Immutable sum of separable products over R^dim."""

    __slots__ = ("dim", "products", "_hash")

    def __init__(self, dim: int, products: Iterable[Product] = ()):
        if dim < 1:
            raise DomainError(f"field dimension must be positive, got {dim}")
        acc = {}
        for c, signals in products:
            signals = tuple(signals)
            if len(signals) != dim:
                raise DomainError(f"product has {len(signals)} factors, field dimension is {dim}")
            if c == 0 or any(s.is_zero for s in signals):
                continue
            key = []
            for s in signals:
                lead, shape = s.normalized()
                c *= lead
                key.append(shape)
            key = tuple(key)
            acc[key] = acc.get(key, 0.0) + c
        self.dim = dim
        self.products: Tuple[Product, ...] = tuple((c, key) for key, c in acc.items() if c != 0)
        self._hash = hash((dim, self.products))

    # --- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "SeparableField":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c: float = 1.0) -> "SeparableField":
        return cls(dim, [(c, (_ONE,) * dim)])

    @classmethod
    def from_factors(cls, dim: int, factors: dict, coeff: float = 1.0) -> "SeparableField":
        """coeff * prod over {axis: signal}; missing axes carry the constant 1."""
        signals = [_ONE] * dim
        for axis, s in factors.items():
            if not 1 <= axis <= dim:
                raise DomainError(f"axis {axis} outside 1..{dim}")
            signals[axis - 1] = s
        return cls(dim, [(coeff, tuple(signals))])

    @classmethod
    def sum(cls, fields: Sequence["SeparableField"], dim: Optional[int] = None) -> "SeparableField":
        dim = dim if dim is not None else fields[0].dim
        return cls(dim, [p for f in fields for p in f.products])

    # --- protocol -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, SeparableField) and self.dim == other.dim and self.products == other.products

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"SeparableField(dim={self.dim}, products={len(self.products)})"

    @property
    def is_zero(self) -> bool:
        return not self.products

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DomainError(f"points have {pts.shape[-1]} coordinates, field dimension is {self.dim}")
        out = np.zeros(pts.shape[:-1])
        cache = {}
        for c, signals in self.products:
            value = np.full(pts.shape[:-1], c)
            for j, s in enumerate(signals):
                if s is _ONE or s == _ONE:
                    continue
                if (j, s) not in cache:
                    cache[(j, s)] = s(pts[..., j])
                value = value * cache[(j, s)]
            out = out + value
        return out

    # --- algebra ------------------------------------------------------------
    def __add__(self, other: "SeparableField") -> "SeparableField":
        self._check_dim(other)
        return SeparableField(self.dim, self.products + other.products)

    def __neg__(self) -> "SeparableField":
        return self.scaled(-1.0)

    def __sub__(self, other: "SeparableField") -> "SeparableField":
        return self + (-other)

    def scaled(self, c: float) -> "SeparableField":
        return SeparableField(self.dim, [(c * k, s) for k, s in self.products])

    def __mul__(self, other: Union["SeparableField", float]) -> "SeparableField":
        if isinstance(other, (int, float)):
            return self.scaled(float(other))
        self._check_dim(other)
        return SeparableField(
            self.dim,
            [
                (c1 * c2, tuple(a * b for a, b in zip(s1, s2)))
                for c1, s1 in self.products
                for c2, s2 in other.products
            ],
        )

    __rmul__ = __mul__

    def _check_dim(self, other: "SeparableField") -> None:
        if self.dim != other.dim:
            raise DomainError(f"dimension mismatch {self.dim} vs {other.dim}")

    def partial(self, axes: Sequence[int]) -> "SeparableField":
        """Mixed partial derivative; the order of ``axes`` is irrelevant."""
        out = self
        for axis in sorted(axes):
            if not 1 <= axis <= self.dim:
                raise DomainError(f"axis {axis} outside 1..{self.dim}")
            out = _partial_axis(out, axis)
        return out

    def extended(self, signals: Sequence[UnivariateSignal]) -> "SeparableField":
        """The field (x, t) -> f(x) * prod_j signals[j](t_j)."""
        signals = tuple(signals)
        return SeparableField(self.dim + len(signals), [(c, s + signals) for c, s in self.products])

    def max_frequency(self) -> float:
        return max((s.max_frequency() for _, sig in self.products for s in sig), default=0.0)

    # --- JSON ---------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "dimension": self.dim,
            "sum": [{"coeff": c, "axes": [s.to_dict() for s in sig]} for c, sig in self.products],
        }

    @classmethod
    def from_payload(cls, payload: "FieldPayload") -> "SeparableField":
        if not payload.sum and payload.dimension is None:
            raise DomainError("an empty field needs an explicit dimension")
        dim = payload.dimension if payload.dimension is not None else len(payload.sum[0].axes)
        return cls(dim, [(p.coeff, tuple(UnivariateSignal.from_payload(s) for s in p.axes)) for p in payload.sum])


@lru_cache(maxsize=65536)
def _partial_axis(f: SeparableField, axis: int) -> SeparableField:
    products = []
    for c, signals in f.products:
        d = signals[axis - 1].derivative()
        if d.is_zero:
            continue
        products.append((c, signals[: axis - 1] + (d,) + signals[axis:]))
    return SeparableField(f.dim, products)


def partial(f: SeparableField, axes: Sequence[int]) -> SeparableField:
    return f.partial(axes)


class ProductPayload(BaseModel):
    coeff: float = 1.0
    axes: List[SignalPayload]


class FieldPayload(BaseModel):
    dimension: Optional[int] = None
    sum: List[ProductPayload]


class VectorPayload(BaseModel):
    components: List[FieldPayload]


class VectorField:
    """Map R^N -> R^n with SeparableField components."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[SeparableField]):
        components = tuple(components)
        if not components:
            raise DomainError("a vector field needs at least one component")
        if len({c.dim for c in components}) != 1:
            raise DomainError("vector field components must share one dimension")
        self.components: Tuple[SeparableField, ...] = components

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def n(self) -> int:
        return len(self.components)

    def __getitem__(self, l: int) -> SeparableField:
        """Component l, 1-based."""
        return self.components[l - 1]

    def __call__(self, points) -> np.ndarray:
        return np.stack([c(points) for c in self.components], axis=-1)

    def partial(self, axes: Sequence[int]) -> "VectorField":
        return VectorField([c.partial(axes) for c in self.components])

    def scaled(self, c: float) -> "VectorField":
        return VectorField([f.scaled(c) for f in self.components])

    def extended(self, signals: Sequence[UnivariateSignal]) -> "VectorField":
        return VectorField([f.extended(signals) for f in self.components])

    def max_frequency(self) -> float:
        return max(c.max_frequency() for c in self.components)

    def to_dict(self) -> dict:
        return {"components": [c.to_dict() for c in self.components]}

    def __repr__(self) -> str:
        return f"VectorField(n={self.n}, dim={self.dim})"


def load_field(path: Union[str, Path]) -> Union[SeparableField, VectorField]:
    """Read a scalar ({"sum": ...}) or vector ({"components": ...}) field from JSON."""
    try:
        raw = orjson.loads(Path(path).read_bytes())
        if isinstance(raw, dict) and "components" in raw:
            payload = VectorPayload.model_validate(raw)
            return VectorField([SeparableField.from_payload(c) for c in payload.components])
        return SeparableField.from_payload(FieldPayload.model_validate(raw))
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise DomainError(f"malformed field JSON in {path}: {e}") from e


# --- hyper-Jacobians ----------------------------------------------------------


def _symmetric_values(field: SeparableField, m: int, point: np.ndarray) -> dict:
    return {axes: float(field.partial(axes)(point)) for axes in combinations_with_replacement(range(1, field.dim + 1), m)}


def derivative_array(v: SeparableField, m: int, x: Sequence[float]) -> HyperMatrix:
    """The m-dimensional array of all order-m partials of a scalar field at x."""
    point = np.asarray(x, dtype=float)
    values = _symmetric_values(v, m, point)
    N = v.dim
    arr = np.empty((N,) * m)
    for idx in product(range(N), repeat=m):
        arr[idx] = values[tuple(sorted(i + 1 for i in idx))]
    return HyperMatrix(arr, "f64")


def hyper_jacobian(u: VectorField, m: int, x: Sequence[float]) -> HyperMatrix:
    """D^m u(x): orders n x N x ... x N, a_{l1 l2 ...} = d_{l2} ... d_{l(m+1)} u^{l1}(x)."""
    if m < 1:
        raise DomainError(f"hyper-Jacobian order must be positive, got {m}")
    point = np.asarray(x, dtype=float)
    N = u.dim
    arr = np.empty((u.n,) + (N,) * m)
    for l1, comp in enumerate(u.components):
        values = _symmetric_values(comp, m, point)
        for idx in product(range(N), repeat=m):
            arr[(l1,) + idx] = values[tuple(sorted(i + 1 for i in idx))]
    return HyperMatrix(arr, "f64")


class MinorField:
    """x -> determinant of the cube b_{j l1 ... lg} = d_{alpha1_l1} ... d_{alphag_lg} rows[j].

    With rows u^{beta_j} this is the minor M^beta_alpha(D^m u); ``expand``
    returns it as a SeparableField.
    """

    def __init__(self, rows: Sequence[SeparableField], alphas: Sequence[MultiIndex]):
        self.rows = tuple(rows)
        self.alphas = tuple(alphas)
        r = len(self.rows)
        if any(len(a) != r for a in self.alphas):
            raise DomainError(f"minor needs {r} entries in every alpha, got {[len(a) for a in self.alphas]}")
        if r and len({f.dim for f in self.rows}) != 1:
            raise DomainError("minor rows must share one dimension")
        self._dim = self.rows[0].dim if r else None

    @property
    def degree(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> Optional[int]:
        return self._dim

    def entry(self, j: int, slots: Tuple[int, ...]) -> SeparableField:
        """Entry at 0-based row j and 0-based slots, one per alpha."""
        return self.rows[j].partial(tuple(a[s] for a, s in zip(self.alphas, slots)))

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        batch = pts.reshape(-1, pts.shape[-1])
        r, groups = self.degree, len(self.alphas)
        if r == 0:
            return np.ones(pts.shape[:-1])
        values = np.empty((len(batch),) + (r,) * (groups + 1))
        for j in range(r):
            for slots in product(range(r), repeat=groups):
                values[(slice(None), j) + slots] = self.entry(j, slots)(batch)
        return det_full_batch(values).reshape(pts.shape[:-1])

    def expand(self, dim: Optional[int] = None) -> SeparableField:
        dim = dim or self._dim
        if dim is None:
            raise DomainError("a degree-0 minor needs an explicit dimension to expand")
        r, groups = self.degree, len(self.alphas)
        perms = list(signed_permutations(r))
        products: List[Product] = []
        for combo in product(perms, repeat=groups):
            sign = math.prod(s for _, s in combo)
            factors = [self.entry(j, tuple(p[j] for p, _ in combo)) for j in range(r)]
            if any(f.is_zero for f in factors):
                continue
            term = SeparableField.constant(dim)
            for f in factors:
                term = term * f
            products.extend((sign * c, sig) for c, sig in term.products)
        return SeparableField(dim, products)


def minor_field(u: VectorField, m: int, spec: MinorSpec) -> MinorField:
    """The minor M^beta_alpha(D^m u) as an evaluable (and expandable) field."""
    if spec.order != m:
        raise DomainError(f"spec has {spec.order} alphas, hyper-Jacobian order is {m}")
    if spec.beta.entries and spec.beta.entries[-1] > u.n:
        raise DomainError(f"beta={spec.beta.entries} exceeds {u.n} components")
    for a in spec.alphas:
        if a.entries and a.entries[-1] > u.dim:
            raise DomainError(f"alpha={a.entries} exceeds dimension {u.dim}")
    return MinorField([u[b] for b in spec.beta], spec.alphas)


def scalar_minor_field(v: SeparableField, m: int, alphas: Sequence[MultiIndex]) -> MinorField:
    """The alpha-minor M_alpha(D^m v) of the m-dimensional array of a scalar field."""
    if len(alphas) != m or m < 1:
        raise DomainError(f"need {m} >= 1 alphas, got {len(alphas)}")
    first, rest = alphas[0], tuple(alphas[1:])
    return MinorField([v.partial((a,)) for a in first], rest)


def lemma25_expansion(u: VectorField, m: int, spec: MinorSpec, i: int) -> SeparableField:
    """The minor regrouped around derivative slot i.

    Sums, over the permutations of every other slot, signed ordinary minors
    det[d_{alpha^i_l} v^j] of the first-derivative matrix of
    v^j = prod_{s != i} d_{alpha^s_{tau_s(j)}} u^{beta_j}.
    """
    if not 1 <= i <= m:
        raise DomainError(f"slot {i} outside 1..{m}")
    base = minor_field(u, m, spec)
    r = base.degree
    others = [s for s in range(m) if s != i - 1]
    perms = list(signed_permutations(r))
    products: List[Product] = []
    for combo in product(perms, repeat=len(others)):
        sign = math.prod(s for _, s in combo)
        v = [
            base.rows[j].partial(tuple(spec.alphas[s][p[j]] for s, (p, _) in zip(others, combo)))
            for j in range(r)
        ]
        inner = MinorField(v, (spec.alphas[i - 1],)).expand(u.dim)
        products.extend((sign * c, sig) for c, sig in inner.products)
    return SeparableField(u.dim, products)


def leveled_minor_split(
    levels: Sequence[Sequence[SeparableField]], alphas: Sequence[MultiIndex]
) -> Tuple[SeparableField, SeparableField, SeparableField]:
    """Split a minor whose rows are sums over levels.

    ``levels[j][l]`` is row j's field at level l.  Returns the full minor
    expansion, the part from level tuples (l, ..., l) and the part from all
    other tuples.
    """
    r = len(levels)
    depth = len(levels[0])
    dim = levels[0][0].dim
    full = MinorField([SeparableField.sum(row) for row in levels], alphas).expand(dim)
    diagonal: List[Product] = []
    off_diagonal: List[Product] = []
    for tup in product(range(depth), repeat=r):
        part = MinorField([levels[j][tup[j]] for j in range(r)], alphas).expand(dim)
        (diagonal if len(set(tup)) == 1 else off_diagonal).extend(part.products)
    return full, SeparableField(dim, diagonal), SeparableField(dim, off_diagonal)


# --- radial fields --------------------------------------------------------------


class RadialField:
    """g(x) = int_0^|x| h(rho) d rho with h supported in (0, 1)."""

    __slots__ = ("profile", "dim", "_slope")

    def __init__(self, profile: UnivariateSignal, dim: int):
        lo, hi = profile.support()
        if not profile.is_zero and (lo <= 0 or hi > 1):
            raise DomainError(f"radial profile must be supported in (0, 1), got [{lo}, {hi})")
        self.profile = profile
        self.dim = dim
        self._slope = profile.derivative()

    def scaled(self, eps: float, rho: float) -> "RadialField":
        """The field x -> eps^rho g(x / eps)."""
        return RadialField(self.profile.rescaled(eps).scaled(eps ** (rho - 1)), self.dim)

    def max_frequency(self) -> float:
        return self.profile.max_frequency()

    @staticmethod
    def _radius(pts: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(pts * pts, axis=-1))

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.profile.cumulative(self._radius(pts))

    def gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        rad = self._radius(pts)
        safe = np.where(rad > 0, rad, 1.0)
        return (self.profile(rad) / safe)[..., None] * pts

    def hessian_values(self, points) -> np.ndarray:
        """(A + B) / |x|^3 at each point, shape (..., N, N)."""
        pts = np.asarray(points, dtype=float)
        rad = self._radius(pts)
        if np.any(rad == 0):
            raise DomainError("the radial Hessian is not evaluated at the origin")
        h, hp = self.profile(rad), self._slope(rad)
        eye = np.eye(self.dim)
        a = (h * rad**2)[..., None, None] * eye
        b = (hp * rad - h)[..., None, None] * pts[..., :, None] * pts[..., None, :]
        return (a + b) / (rad**3)[..., None, None]

    def hessian(self, x: Sequence[float]) -> HyperMatrix:
        return HyperMatrix(self.hessian_values(np.asarray(x, dtype=float)), "f64")

    def partial(self, axes: Sequence[int]) -> "_RadialPartial":
        if len(axes) > 2:
            raise DomainError("radial fields expose partials up to order 2")
        return _RadialPartial(self, tuple(sorted(axes)))


class _RadialPartial:
    __slots__ = ("field", "axes", "dim")

    def __init__(self, field: RadialField, axes: Tuple[int, ...]):
        self.field, self.axes, self.dim = field, axes, field.dim

    def max_frequency(self) -> float:
        return self.field.max_frequency()

    def __call__(self, points) -> np.ndarray:
        if not self.axes:
            return self.field(points)
        if len(self.axes) == 1:
            return self.field.gradient(points)[..., self.axes[0] - 1]
        i, j = self.axes
        return self.field.hessian_values(points)[..., i - 1, j - 1]


def radial_hessian_minor(g: RadialField, alpha: MultiIndex, x) -> Union[float, np.ndarray]:
    """M^alpha_alpha(D^2 g)(x) from the rank-one update of h|x|^2 I, without expanding a determinant.

    ``x`` is one point or an array of points with the coordinates last.
    """
    pts = np.asarray(x, dtype=float)
    rad = np.sqrt(np.sum(pts * pts, axis=-1))
    if np.any(rad == 0):
        raise DomainError("the radial Hessian minor is not evaluated at the origin")
    r = len(alpha)
    if r == 0:
        return 1.0 if pts.ndim == 1 else np.ones(rad.shape)
    h, hp = g.profile(rad), g._slope(rad)
    s = sum(pts[..., i - 1] ** 2 for i in alpha)
    value = h**r * rad ** (2 * r) - h**r * rad ** (2 * r - 2) * s + h ** (r - 1) * hp * rad ** (2 * r - 1) * s
    value = value / rad ** (3 * r)
    return float(value) if pts.ndim == 1 else value


def finite_difference_partial(f, axes: Sequence[int], x: Sequence[float], step: float) -> float:
    """Nested central difference of ``f`` along ``axes`` at x."""
    point = np.asarray(x, dtype=float)
    k = len(axes)
    total = 0.0
    for signs in product((1.0, -1.0), repeat=k):
        shifted = point.copy()
        for axis, sgn in zip(axes, signs):
            shifted[axis - 1] += sgn * step
        total += math.prod(signs) * float(f(shifted))
    return total / (2 * step) ** k
