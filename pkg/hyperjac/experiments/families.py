"""Counterexample families: configuration, lacunary schedules and per-k fields."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Annotated, Any, Dict, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, PositiveInt, ValidationError

from ..calculus import BoxDomain
from ..errors import ConfigError, DomainError, ResourceError
from ..fields import (
    RadialField,
    SeparableField,
    VectorField,
    leveled_minor_split,
    minor_field,
    scalar_minor_field,
)
from ..hypermatrix import MinorSpec
from ..multiindex import MultiIndex
from ..signal import UnivariateSignal, plateau_bump, radial_profile

__all__ = [
    "FAMILIES",
    "FamilyConfig",
    "Sample",
    "parse_rational",
    "lacunary_frequencies",
    "check_lacunarity",
    "family_prop45",
    "family_prop47",
    "family_prop49",
    "family_thm411_case2",
    "family_thm411_case3",
    "build_sample",
]

logger = logging.getLogger(__name__)

FamilyId = Literal["prop45", "prop47", "prop49", "thm411case2", "thm411case3"]
FAMILIES: Tuple[str, ...] = ("prop45", "prop47", "prop49", "thm411case2", "thm411case3")

# frequencies above this lose integer exactness in double precision
EXACT_LIMIT = 2**53


def parse_rational(value) -> Fraction:
    """Fraction from "3/4", "0.75", ints or floats (floats read through their decimal repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {value!r}") from e


Rational = Annotated[Fraction, BeforeValidator(parse_rational)]


class FamilyConfig(BaseModel):
    """Parameters of one counterexample sweep.

    ``n`` defaults to ``N``; ``smoothness`` (of the cut-off) to ``m``.  For
    prop49 a missing ``rho`` becomes the midpoint of its admissible interval.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    family: FamilyId
    N: PositiveInt = 2
    n: Optional[PositiveInt] = None
    m: PositiveInt = 2
    r: PositiveInt = 2
    rho: Optional[Rational] = None
    s: Rational = Fraction(1, 2)
    p: Rational = Fraction(3)
    ks: Tuple[PositiveInt, ...] = (8, 16, 32, 64, 128, 256)
    reduced: bool = True
    base: PositiveInt = 8
    smoothness: Optional[PositiveInt] = None
    psi_correction: float = 0.0
    window_periods: PositiveInt = 2
    norms: bool = True

    @classmethod
    def build(cls, **values) -> "FamilyConfig":
        try:
            cfg = cls.model_validate({k: v for k, v in values.items() if v is not None})
        except ValidationError as e:
            raise ConfigError(f"invalid family configuration: {e}") from e
        return cfg.checked()

    @property
    def components(self) -> int:
        return self.n or self.N

    @property
    def psi_smoothness(self) -> int:
        return self.smoothness or self.m

    def checked(self) -> "FamilyConfig":
        """Enforce the family constraints; returns the config with defaults resolved."""
        N, n, m, r, s = self.N, self.components, self.m, self.r, self.s
        if r < 2:
            raise ConfigError(f"degree r must exceed 1, got {r}")
        if r > min(n, N):
            raise ConfigError(f"degree r={r} exceeds min(n, N) = {min(n, N)}")
        if not self.ks:
            raise ConfigError("the k schedule is empty")
        if self.family in ("thm411case2", "thm411case3", "prop49") and m != 2:
            raise ConfigError(f"{self.family} is a Hessian (m = 2) construction, got m={m}")
        if self.family in ("prop47", "thm411case3") and min(self.ks) < 2:
            raise ConfigError(f"{self.family} scales by ln k and needs k >= 2")
        rho = self.rho
        if self.family == "prop45":
            rho = self._require_rho()
            if not s < rho < m - Fraction(m, r):
                raise ConfigError(f"prop45 needs s < rho < m - m/r = {m - Fraction(m, r)}, got s={s}, rho={rho}")
        elif self.family == "thm411case2":
            rho = self._require_rho()
            if not s < rho < 2 - Fraction(2, r):
                raise ConfigError(f"thm411case2 needs s < rho < 2 - 2/r = {2 - Fraction(2, r)}, got s={s}, rho={rho}")
        elif self.family == "prop49":
            lo, hi = s - Fraction(N) / self.p, m - Fraction(N, r) - Fraction(m, r)
            if not lo < hi:
                raise ConfigError(f"prop49 interval s - N/p = {lo} < rho < m - N/r - m/r = {hi} is empty")
            if rho is None:
                rho = (lo + hi) / 2
                logger.info("prop49: rho defaults to %s, the midpoint of (%s, %s)", rho, lo, hi)
            if not lo < rho < hi:
                raise ConfigError(f"prop49 needs {lo} < rho < {hi}, got {rho}")
        elif self.family == "prop47" and s != m - Fraction(m, r):
            logger.warning("prop47: s=%s differs from m - m/r = %s, the diagonal is no longer level-free", s, m - Fraction(m, r))
        elif self.family == "thm411case3" and r == 2:
            logger.warning("thm411case3 is stated for r > 2; running r=2 anyway")
        return self.model_copy(update={"rho": rho}) if rho != self.rho else self

    def _require_rho(self) -> Fraction:
        if self.rho is None:
            raise ConfigError(f"{self.family} needs an explicit rho")
        return self.rho

    def predicted_minor_exponent(self) -> Optional[Fraction]:
        """Power of k (of eps for prop49) the minor integral is expected to follow."""
        m, r, rho = self.m, self.r, self.rho
        if self.family == "prop45":
            return m * r - rho * r - m
        if self.family == "thm411case2":
            return 2 * r - 2 - r * rho
        if self.family == "prop49":
            return rho * r - r * m + self.N + m
        return None

    def predicted_norm_exponent(self) -> Optional[Fraction]:
        if self.family in ("prop45", "thm411case2"):
            return self.s - self.rho
        if self.family == "prop49":
            return self.rho + Fraction(self.N) / self.p - self.s
        return None

    def to_dict(self) -> dict:
        out = {}
        for name, value in self.model_dump().items():
            out[name] = str(value) if isinstance(value, Fraction) else value
        out["ks"] = list(self.ks)
        out["n"] = self.components
        return out


@dataclass(frozen=True)
class Sample:
    """One member of a family.

    ``minor`` is the minor expansion before multiplication by ``psi``;
    ``prefactor`` multiplies its integral (the ln k scaling of the lacunary
    families).  ``split`` holds (full, diagonal, off-diagonal) minors.
    """

    k: int
    u: Union[VectorField, SeparableField, RadialField]
    box: BoxDomain
    psi: Optional[SeparableField] = None
    minor: Optional[SeparableField] = None
    prefactor: float = 1.0
    split: Optional[Tuple[SeparableField, SeparableField, SeparableField]] = None
    frequencies: Tuple[int, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)


# --- schedules -----------------------------------------------------------------


def lacunary_frequencies(family: str, k: int, r: int, m: int, reduced: bool = True, base: int = 8) -> Tuple[int, ...]:
    """n_1 < ... < n_k for the lacunary families.

    Reduced mode uses n_l = k * base^l.  Full scale is k^(r^2/m) 8^l (rounded
    up) for prop47 and is refused for thm411case3, whose n_l = k^(r^(3l))
    overflows at once.
    """
    if reduced:
        return tuple(k * base**l for l in range(1, k + 1))
    if family == "thm411case3":
        raise ResourceError(f"thm411case3 frequencies k^(r^(3l)) exceed {EXACT_LIMIT} at k={k}; use reduced mode")
    if family != "prop47":
        raise DomainError(f"{family} has no lacunary schedule")
    if (r * r) % m == 0:
        lead = k ** (r * r // m)
    else:
        lead = math.ceil(k ** (r * r / m))
    ns = tuple(lead * 8**l for l in range(1, k + 1))
    if ns[-1] > EXACT_LIMIT:
        raise ResourceError(f"prop47 frequency {ns[-1]} exceeds {EXACT_LIMIT} at k={k}; use reduced mode")
    return ns


def check_lacunarity(ns: Sequence[int], k: int, r: int, m: int) -> Dict[str, bool]:
    """Ratio, minimal-gap and dyadic-block conditions on a frequency list."""
    ns = sorted(ns)
    pairs = [(a, b) for a in ns for b in ns if a != b]
    gaps = [b - a for a, b in zip(ns, ns[1:])]
    threshold = k ** (r * r / (m * (r - 1)))
    blocks = [n.bit_length() for n in ns]
    return {
        "ratio": all(Fraction(a, b) <= abs(a - b) for a, b in pairs),
        "min_gap": all(g >= threshold for g in gaps),
        "dyadic": len(set(blocks)) == len(blocks),
    }


# --- builders ------------------------------------------------------------------


def _sin(omega: float, phi=0) -> UnivariateSignal:
    return UnivariateSignal.trig("sin", omega, phi)


def _cutoff(cfg: FamilyConfig) -> Tuple[BoxDomain, SeparableField]:
    bump = plateau_bump(cfg.psi_smoothness)
    box = BoxDomain.cube(0.0, math.pi, cfg.N)
    return box, SeparableField(cfg.N, [(1.0, (bump,) * cfg.N)])


def _full_spec(cfg: FamilyConfig) -> MinorSpec:
    r = cfg.r
    return MinorSpec.build(range(1, r + 1), [range(1, r + 1)] * cfg.m, cfg.components, cfg.N)


def _last_row(N: int, r: int, m: int, omega: float, coeff: float) -> SeparableField:
    """coeff * x_r^m * prod_{j<r} sin(m pi/2 + omega x_j)."""
    factors = {r: UnivariateSignal.monomial(m)}
    factors.update({j: _sin(omega, Fraction(m, 2)) for j in range(1, r)})
    return SeparableField.from_factors(N, factors, coeff)


def family_prop45(cfg: FamilyConfig, k: int) -> Sample:
    """u^i = k^-rho sin(k x_i) for i < r, u^r = k^-rho x_r^m prod sin(m pi/2 + k x_j), rest zero."""
    N, r, m = cfg.N, cfg.r, cfg.m
    amp = float(k) ** -float(cfg.rho)
    comps = [SeparableField.from_factors(N, {i: _sin(k)}, amp) for i in range(1, r)]
    comps.append(_last_row(N, r, m, k, amp))
    comps += [SeparableField.zero(N)] * (cfg.components - r)
    u = VectorField(comps)
    box, psi = _cutoff(cfg)
    return Sample(k, u, box, psi, minor_field(u, m, _full_spec(cfg)).expand())


def family_prop47(cfg: FamilyConfig, k: int) -> Sample:
    """Lacunary sums over n_l with weights n_l^-s (l+1)^(-1/r), scaled by (ln k)^(-1/(2r))."""
    N, r, m = cfg.N, cfg.r, cfg.m
    ns = lacunary_frequencies("prop47", k, r, m, cfg.reduced, cfg.base)
    weights = [float(n) ** -float(cfg.s) * (l + 1) ** (-1.0 / r) for l, n in enumerate(ns, start=1)]
    levels = [[SeparableField.from_factors(N, {i: _sin(n)}, w) for n, w in zip(ns, weights)] for i in range(1, r)]
    levels.append([_last_row(N, r, m, n, w) for n, w in zip(ns, weights)])
    spec = _full_spec(cfg)
    split = leveled_minor_split(levels, spec.alphas)
    scale = math.log(k) ** (-1.0 / (2 * r))
    rows = [SeparableField.sum(level).scaled(scale) for level in levels]
    u = VectorField(rows + [SeparableField.zero(N)] * (cfg.components - r))
    box, psi = _cutoff(cfg)
    return Sample(k, u, box, psi, split[0], scale**r, split, ns)


def family_prop49(cfg: FamilyConfig, k: int, profile: Optional[UnivariateSignal] = None) -> Sample:
    """u_eps = eps^rho g(x/eps) with eps = 1/k and g the radial field of ``profile``."""
    g = RadialField(profile if profile is not None else radial_profile(), cfg.N)
    eps = 1.0 / k
    return Sample(k, g.scaled(eps, float(cfg.rho)), BoxDomain.cube(-1.0, 1.0, cfg.N), extras={"eps": eps})


def _hessian_alphas(r: int, N: int) -> Tuple[MultiIndex, MultiIndex]:
    alpha = MultiIndex(tuple(range(1, r + 1)), N)
    return alpha, alpha


def family_thm411_case2(cfg: FamilyConfig, k: int) -> Sample:
    """Scalar u_k = k^-rho x_r prod_{i<r} sin^2(k x_i) under the Hessian minor."""
    N, r = cfg.N, cfg.r
    square = _sin(k) * _sin(k)
    factors = {r: UnivariateSignal.monomial(1)}
    factors.update({i: square for i in range(1, r)})
    u = SeparableField.from_factors(N, factors, float(k) ** -float(cfg.rho))
    box, psi = _cutoff(cfg)
    minor = scalar_minor_field(u, 2, _hessian_alphas(r, N)).expand()
    # the same minor through r copies of u, divided by r!
    copies = VectorField([u] * r)
    spec = MinorSpec.build(range(1, r + 1), [range(1, r + 1)] * 2, r, N)
    through_vector = minor_field(copies, 2, spec).expand().scaled(1.0 / math.factorial(r))
    return Sample(k, u, box, psi, minor, extras={"vector_route": through_vector})


def family_thm411_case3(cfg: FamilyConfig, k: int) -> Sample:
    """(ln k)^(-1/(2r)) x_r sum_l n_l^(2/r-2) l^(-1/r) prod_{i<r} sin^2(n_l x_i), reduced base only."""
    N, r = cfg.N, cfg.r
    if not cfg.reduced:
        lacunary_frequencies("thm411case3", k, r, 2, reduced=False)
    ns = lacunary_frequencies("thm411case3", k, r, 2, True, cfg.base)
    terms = []
    for l, n in enumerate(ns, start=1):
        square = _sin(n) * _sin(n)
        factors = {r: UnivariateSignal.monomial(1)}
        factors.update({i: square for i in range(1, r)})
        terms.append(SeparableField.from_factors(N, factors, float(n) ** (2.0 / r - 2.0) * l ** (-1.0 / r)))
    alpha, _ = _hessian_alphas(r, N)
    levels = [[t.partial((a,)) for t in terms] for a in alpha]
    split = leveled_minor_split(levels, (alpha,))
    scale = math.log(k) ** (-1.0 / (2 * r))
    u = SeparableField.sum(terms).scaled(scale)
    box, psi = _cutoff(cfg)
    return Sample(k, u, box, psi, split[0], scale**r, split, ns)


_BUILDERS = {
    "prop45": family_prop45,
    "prop47": family_prop47,
    "prop49": family_prop49,
    "thm411case2": family_thm411_case2,
    "thm411case3": family_thm411_case3,
}


def build_sample(cfg: FamilyConfig, k: int) -> Sample:
    return _BUILDERS[cfg.family](cfg, k)
