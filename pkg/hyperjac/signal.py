"""Univariate piecewise poly-trig signals.

A signal is a list of pieces [lo, hi) with terms c * x^a * T(omega x + phi pi),
T one of sin, cos or the constant 1.  Outside every piece the signal is 0.
The class is closed under differentiation, products and sums, and integrates
exactly (repeated integration by parts), whatever the frequency.
"""

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from pydantic import BaseModel

from .errors import DomainError

__all__ = [
    "Term",
    "Piece",
    "UnivariateSignal",
    "smoothstep_coefficients",
    "plateau_bump",
    "extension_profile",
    "alternative_extension_profile",
    "radial_profile",
]

INF = math.inf


class Term(NamedTuple):
    c: float
    a: int
    kind: str  # "one" | "sin" | "cos"
    omega: float
    phi: Fraction  # phase as a multiple of pi, in [0, 2)

    @property
    def key(self):
        return (self.a, self.kind, self.omega, self.phi)


class Piece(NamedTuple):
    lo: float
    hi: float
    terms: Tuple[Term, ...]


# phase shifts by quarter turns: (kind, phi) -> (sign, kind) with zero phase
_QUARTER = {
    ("sin", Fraction(1, 2)): (1.0, "cos"),
    ("sin", Fraction(1)): (-1.0, "sin"),
    ("sin", Fraction(3, 2)): (-1.0, "cos"),
    ("cos", Fraction(1, 2)): (-1.0, "sin"),
    ("cos", Fraction(1)): (-1.0, "cos"),
    ("cos", Fraction(3, 2)): (1.0, "sin"),
}

# k-th antiderivative of sin/cos, k mod 4: (kind, sign)
_ANTIDERIVATIVE = {
    "sin": [("sin", 1.0), ("cos", -1.0), ("sin", -1.0), ("cos", 1.0)],
    "cos": [("cos", 1.0), ("sin", 1.0), ("cos", -1.0), ("sin", -1.0)],
}


def _exact_trig(kind: str, phi: Fraction) -> float:
    """sin(phi pi) or cos(phi pi), exact at quarter turns."""
    quarter = {Fraction(0): (0.0, 1.0), Fraction(1, 2): (1.0, 0.0), Fraction(1): (0.0, -1.0), Fraction(3, 2): (-1.0, 0.0)}
    if phi in quarter:
        s, c = quarter[phi]
        return s if kind == "sin" else c
    return math.sin(math.pi * phi) if kind == "sin" else math.cos(math.pi * phi)


def _normalize(c: float, a: int, kind: str, omega: float, phi) -> Optional[Term]:
    if c == 0:
        return None
    if kind == "one":
        return Term(float(c), int(a), "one", 0.0, Fraction(0))
    if kind not in ("sin", "cos"):
        raise DomainError(f"unknown term kind {kind!r}")
    phi = Fraction(phi)
    if omega < 0:
        omega, phi = -omega, -phi
        if kind == "sin":
            c = -c
    phi = phi % 2
    if omega == 0:
        return _normalize(c * _exact_trig(kind, phi), a, "one", 0.0, 0)
    if (kind, phi) in _QUARTER:
        sign, kind = _QUARTER[(kind, phi)]
        c, phi = c * sign, Fraction(0)
    return Term(float(c), int(a), kind, float(omega), phi)


def _merge(terms: Iterable[Optional[Term]]) -> Tuple[Term, ...]:
    acc: Dict[tuple, float] = {}
    for t in terms:
        if t is None:
            continue
        acc[t.key] = acc.get(t.key, 0.0) + t.c
    return tuple(Term(c, *key) for key, c in sorted(acc.items(), key=lambda kv: _sort_key(kv[0])) if c != 0)


def _sort_key(key):
    a, kind, omega, phi = key
    return (a, kind, omega, phi)


def _term_product(s: Term, t: Term) -> List[Optional[Term]]:
    c, a = s.c * t.c, s.a + t.a
    if s.kind == "one":
        return [_normalize(c, a, t.kind, t.omega, t.phi)]
    if t.kind == "one":
        return [_normalize(c, a, s.kind, s.omega, s.phi)]
    dw, sw = s.omega - t.omega, s.omega + t.omega
    dp, sp = s.phi - t.phi, s.phi + t.phi
    half = 0.5 * c
    if s.kind == "sin" and t.kind == "sin":
        return [_normalize(half, a, "cos", dw, dp), _normalize(-half, a, "cos", sw, sp)]
    if s.kind == "cos" and t.kind == "cos":
        return [_normalize(half, a, "cos", dw, dp), _normalize(half, a, "cos", sw, sp)]
    if s.kind == "sin":  # sin * cos
        return [_normalize(half, a, "sin", sw, sp), _normalize(half, a, "sin", dw, dp)]
    # cos * sin
    return [_normalize(half, a, "sin", sw, sp), _normalize(-half, a, "sin", dw, dp)]


def _term_derivative(t: Term) -> List[Optional[Term]]:
    out = []
    if t.a > 0:
        out.append(_normalize(t.c * t.a, t.a - 1, t.kind, t.omega, t.phi))
    if t.kind == "sin":
        out.append(_normalize(t.c * t.omega, t.a, "cos", t.omega, t.phi))
    elif t.kind == "cos":
        out.append(_normalize(-t.c * t.omega, t.a, "sin", t.omega, t.phi))
    return out


def _trig(kind: str, arg):
    return np.sin(arg) if kind == "sin" else np.cos(arg)


def _term_values(t: Term, x: np.ndarray) -> np.ndarray:
    poly = x ** t.a if t.a else np.ones_like(x)
    if t.kind == "one":
        return t.c * poly
    return t.c * poly * _trig(t.kind, t.omega * x + math.pi * float(t.phi))


def _antiderivative(t: Term, x):
    x = np.asarray(x, dtype=float)
    if t.kind == "one":
        return t.c * x ** (t.a + 1) / (t.a + 1)
    arg = t.omega * x + math.pi * float(t.phi)
    total, falling = np.zeros_like(x), 1.0
    for j in range(t.a + 1):
        kind, sign = _ANTIDERIVATIVE[t.kind][(j + 1) % 4]
        total = total + (-1) ** j * falling * x ** (t.a - j) * sign * _trig(kind, arg) / t.omega ** (j + 1)
        falling *= t.a - j
    return t.c * total


def _sample_point(lo: float, hi: float) -> float:
    if lo == -INF and hi == INF:
        return 0.0
    if lo == -INF:
        return hi - 1.0
    if hi == INF:
        return lo + 1.0
    return 0.5 * (lo + hi)


class UnivariateSignal:
    """Immutable piecewise poly-trig function of one variable."""

    __slots__ = ("pieces", "_hash")

    def __init__(self, pieces: Iterable[Piece]):
        cleaned = []
        for p in sorted(pieces, key=lambda p: p.lo):
            if not p.lo < p.hi:
                raise DomainError(f"empty piece [{p.lo}, {p.hi})")
            terms = _merge(p.terms)
            if terms:
                cleaned.append(Piece(float(p.lo), float(p.hi), terms))
        for left, right in zip(cleaned, cleaned[1:]):
            if right.lo < left.hi:
                raise DomainError(f"overlapping pieces [{left.lo}, {left.hi}) and [{right.lo}, {right.hi})")
        self.pieces: Tuple[Piece, ...] = tuple(cleaned)
        self._hash = hash(self.pieces)

    # --- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c: float = 1.0, lo: float = -INF, hi: float = INF) -> "UnivariateSignal":
        return cls([Piece(lo, hi, (Term(float(c), 0, "one", 0.0, Fraction(0)),))])

    @classmethod
    def monomial(cls, a: int, c: float = 1.0, lo: float = -INF, hi: float = INF) -> "UnivariateSignal":
        return cls([Piece(lo, hi, (_normalize(c, a, "one", 0.0, 0),))])

    @classmethod
    def trig(
        cls, kind: str, omega: float, phi=0, c: float = 1.0, a: int = 0, lo: float = -INF, hi: float = INF
    ) -> "UnivariateSignal":
        """c * x^a * kind(omega x + phi pi)."""
        return cls([Piece(lo, hi, (_normalize(c, a, kind, omega, phi),))])

    @classmethod
    def polynomial(cls, coefficients: Sequence[float], lo: float = -INF, hi: float = INF) -> "UnivariateSignal":
        """sum_i coefficients[i] x^i on [lo, hi)."""
        return cls([Piece(lo, hi, tuple(_normalize(c, i, "one", 0.0, 0) for i, c in enumerate(coefficients)))])

    @classmethod
    def zero(cls) -> "UnivariateSignal":
        return cls([])

    # --- protocol -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, UnivariateSignal) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"UnivariateSignal({len(self.pieces)} pieces, {sum(len(p.terms) for p in self.pieces)} terms)"

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self(x[None])[0]
        out = np.zeros_like(x)
        for p in self.pieces:
            mask = (x >= p.lo) & (x < p.hi)
            if not mask.any():
                continue
            xs = x[mask]
            out[mask] = sum(_term_values(t, xs) for t in p.terms)
        return out

    # --- algebra ------------------------------------------------------------
    def _breaks(self) -> List[float]:
        return [b for p in self.pieces for b in (p.lo, p.hi)]

    def _terms_at(self, x: float) -> Tuple[Term, ...]:
        for p in self.pieces:
            if p.lo <= x < p.hi:
                return p.terms
        return ()

    def _combine(self, other: "UnivariateSignal", rule) -> "UnivariateSignal":
        breaks = sorted(set(self._breaks()) | set(other._breaks()))
        pieces = []
        for lo, hi in zip(breaks, breaks[1:]):
            x = _sample_point(lo, hi)
            terms = rule(self._terms_at(x), other._terms_at(x))
            if terms:
                pieces.append(Piece(lo, hi, tuple(terms)))
        return UnivariateSignal(pieces)

    def __add__(self, other: "UnivariateSignal") -> "UnivariateSignal":
        return self._combine(other, lambda s, t: s + t)

    def __neg__(self) -> "UnivariateSignal":
        return self.scaled(-1.0)

    def __sub__(self, other: "UnivariateSignal") -> "UnivariateSignal":
        return self + (-other)

    def __mul__(self, other: "UnivariateSignal") -> "UnivariateSignal":
        if isinstance(other, (int, float)):
            return self.scaled(other)
        return _multiply(self, other)

    def scaled(self, c: float) -> "UnivariateSignal":
        return UnivariateSignal(Piece(p.lo, p.hi, tuple(t._replace(c=t.c * c) for t in p.terms)) for p in self.pieces)

    def power(self, k: int) -> "UnivariateSignal":
        if k < 0:
            raise DomainError(f"negative power {k}")
        out = UnivariateSignal.constant(1.0)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self, order: int = 1) -> "UnivariateSignal":
        out = self
        for _ in range(order):
            out = _derivative(out)
        return out

    def rescaled(self, lam: float) -> "UnivariateSignal":
        """The signal x -> f(x / lam), lam > 0."""
        if lam <= 0:
            raise DomainError(f"rescaling needs lam > 0, got {lam}")
        pieces = []
        for p in self.pieces:
            terms = tuple(_normalize(t.c * lam ** (-t.a), t.a, t.kind, t.omega / lam, t.phi) for t in p.terms)
            pieces.append(Piece(p.lo * lam, p.hi * lam, terms))
        return UnivariateSignal(pieces)

    def normalized(self) -> Tuple[float, "UnivariateSignal"]:
        """Split off the leading coefficient so equal shapes compare equal."""
        if self.is_zero:
            return 0.0, self
        lead = self.pieces[0].terms[0].c
        if lead == 1.0:
            return 1.0, self
        return lead, UnivariateSignal(
            Piece(p.lo, p.hi, tuple(t._replace(c=t.c / lead) for t in p.terms)) for p in self.pieces
        )

    # --- analysis -----------------------------------------------------------
    def integrate(self, lo: float, hi: float) -> float:
        """Exact definite integral over [lo, hi]."""
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("integration bounds must be finite")
        if hi < lo:
            return -self.integrate(hi, lo)
        total = 0.0
        for p in self.pieces:
            a, b = max(lo, p.lo), min(hi, p.hi)
            if a >= b:
                continue
            total += float(sum(_antiderivative(t, b) - _antiderivative(t, a) for t in p.terms))
        return total

    def cumulative(self, xs, base: float = 0.0) -> np.ndarray:
        """Integral from ``base`` to each x, vectorized piecewise."""
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(xs.shape)
        for p in self.pieces:
            right = np.clip(xs, p.lo, p.hi)
            left = min(max(base, p.lo), p.hi)
            out = out + sum(_antiderivative(t, right) - _antiderivative(t, left) for t in p.terms)
        return out

    def max_frequency(self) -> float:
        return max((t.omega for p in self.pieces for t in p.terms), default=0.0)

    def support(self) -> Tuple[float, float]:
        if self.is_zero:
            return (0.0, 0.0)
        return self.pieces[0].lo, self.pieces[-1].hi

    # --- JSON ---------------------------------------------------------------
    def to_dict(self) -> dict:
        def edge(v):
            return None if math.isinf(v) else v

        return {
            "pieces": [
                {
                    "lo": edge(p.lo),
                    "hi": edge(p.hi),
                    "terms": [
                        {"c": t.c, "a": t.a, "kind": t.kind, "omega": t.omega, "phi_over_pi": str(t.phi)}
                        for t in p.terms
                    ],
                }
                for p in self.pieces
            ]
        }

    @classmethod
    def from_payload(cls, payload: "SignalPayload") -> "UnivariateSignal":
        pieces = []
        for p in payload.pieces:
            lo = -INF if p.lo is None else p.lo
            hi = INF if p.hi is None else p.hi
            terms = tuple(_normalize(t.c, t.a, t.kind, t.omega, Fraction(str(t.phi_over_pi))) for t in p.terms)
            pieces.append(Piece(lo, hi, terms))
        return cls(pieces)


@lru_cache(maxsize=65536)
def _multiply(s: UnivariateSignal, t: UnivariateSignal) -> UnivariateSignal:
    return s._combine(t, lambda p, q: [x for a in p for b in q for x in _term_product(a, b)])


@lru_cache(maxsize=65536)
def _derivative(s: UnivariateSignal) -> UnivariateSignal:
    return UnivariateSignal(
        Piece(p.lo, p.hi, tuple(x for t in p.terms for x in _term_derivative(t))) for p in s.pieces
    )


class TermPayload(BaseModel):
    c: float
    a: int = 0
    kind: str = "one"
    omega: float = 0.0
    phi_over_pi: Union[str, float, int] = "0"


class PiecePayload(BaseModel):
    lo: Optional[float] = None
    hi: Optional[float] = None
    terms: List[TermPayload]


class SignalPayload(BaseModel):
    pieces: List[PiecePayload]


# --- profiles --------------------------------------------------------------


@lru_cache(maxsize=None)
def smoothstep_coefficients(order: int) -> Tuple[Fraction, ...]:
    """Ascending coefficients of the degree 2*order+1 ramp S on [0, 1].

    S(0) = 0, S(1) = 1 and the first ``order`` derivatives vanish at both ends.
    """
    t, tau = sympy.symbols("t tau")
    kernel = tau**order * (1 - tau) ** order
    ramp = sympy.integrate(kernel, (tau, 0, t)) / sympy.integrate(kernel, (tau, 0, 1))
    coeffs = sympy.Poly(sympy.expand(ramp), t).all_coeffs()[::-1]
    return tuple(Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in coeffs)


def _substitute(coefficients: Sequence[float], origin: float, width: float) -> List[float]:
    """Coefficients in x of p((x - origin) / width), p given in ascending order."""
    out = [0.0] * len(coefficients)
    for j, c in enumerate(coefficients):
        scale = float(c) / width**j
        for i in range(j + 1):
            out[i] += scale * math.comb(j, i) * (-origin) ** (j - i)
    return out


def _ramp_piece(order: int, start: float, end: float) -> Piece:
    """Piece on [min, max) rising 0 -> 1 from ``start`` to ``end`` (either direction)."""
    coeffs = _substitute(smoothstep_coefficients(order), start, end - start)
    lo, hi = min(start, end), max(start, end)
    return Piece(lo, hi, tuple(_normalize(c, i, "one", 0.0, 0) for i, c in enumerate(coeffs)))


def plateau_bump(
    smoothness: int,
    inner: Tuple[float, float] = (math.pi / 4, 3 * math.pi / 4),
    outer: Tuple[float, float] = (math.pi / 8, 7 * math.pi / 8),
) -> UnivariateSignal:
    """C^smoothness bump, 1 on ``inner`` and supported in ``outer``."""
    (a, b), (lo, hi) = inner, outer
    if not lo < a < b < hi:
        raise DomainError(f"need outer[0] < inner[0] < inner[1] < outer[1], got {inner} in {outer}")
    one = Piece(a, b, (Term(1.0, 0, "one", 0.0, Fraction(0)),))
    return UnivariateSignal([_ramp_piece(smoothness, lo, a), one, _ramp_piece(smoothness, hi, b)])


def extension_profile(smoothness: int, end: float = 0.75) -> UnivariateSignal:
    """chi on [0, 1): chi(0) = 1, C^(smoothness+1), chi = 0 on [end, 1)."""
    if not 0 < end < 1:
        raise DomainError(f"profile end must lie in (0, 1), got {end}")
    return UnivariateSignal([_ramp_piece(smoothness + 1, end, 0.0)])


def alternative_extension_profile(smoothness: int, end: float = 0.5) -> UnivariateSignal:
    """chi(t) = (1 - t/end)^(smoothness+2) on [0, end), zero after."""
    if not 0 < end < 1:
        raise DomainError(f"profile end must lie in (0, 1), got {end}")
    k = smoothness + 2
    coeffs = [math.comb(k, i) * (-1.0 / end) ** i for i in range(k + 1)]
    return UnivariateSignal.polynomial(coeffs, 0.0, end)


def radial_profile(smoothness: int = 3, split: float = 0.5, margin: float = 0.125) -> UnivariateSignal:
    """Default h: a positive bump on [margin, split) minus its copy on [split, 1 - margin).

    The two bumps have the same width, so the integral of h vanishes.
    """
    width = split - margin
    if abs((1 - margin) - split - width) > 1e-15:
        raise DomainError("radial profile halves must have equal width")
    # (t(1-t))^k scaled to peak 1
    t, k = sympy.symbols("t"), smoothness
    bump = sympy.Poly(sympy.expand(4**k * (t * (1 - t)) ** k), t).all_coeffs()[::-1]
    bump = [float(c) for c in bump]
    rise = _substitute(bump, margin, width)
    fall = _substitute([-c for c in bump], split, width)
    return UnivariateSignal(
        [
            Piece(margin, split, tuple(_normalize(c, i, "one", 0.0, 0) for i, c in enumerate(rise))),
            Piece(split, 1 - margin, tuple(_normalize(c, i, "one", 0.0, 0) for i, c in enumerate(fall))),
        ]
    )
