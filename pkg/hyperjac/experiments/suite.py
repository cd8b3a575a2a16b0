"""Randomized identity suites for determinants, minors and the extension identity.

Every check draws from its own generator seeded with (seed, check index), so a
report depends only on the seed and trial count, never on the worker count.
Failures carry the offending input as JSON-ready data.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np
import sympy
from joblib import Parallel, delayed

from ..calculus import BoxDomain, ibp_identity_check
from ..config import get_settings
from ..errors import ConfigError
from ..fields import SeparableField, VectorField, lemma25_expansion, minor_field, scalar_minor_field
from ..hypermatrix import (
    HyperMatrix,
    MinorSpec,
    det_full,
    det_layer_fold,
    is_multilinear_in_layer,
    laplace_expand,
    minor_det,
    minor_difference_bound,
    swap_layers,
    transpose,
)
from ..multiindex import MultiIndex
from ..signal import UnivariateSignal, alternative_extension_profile, extension_profile, plateau_bump

__all__ = ["SUITES", "Check", "random_separable", "random_ibp_case", "compare_extension_identity", "run_lemma_suite"]

logger = logging.getLogger(__name__)

SUITES = ("lemmas", "ibp", "bounds", "all")
# failures kept per check in a report
MAX_FAILURES = 5
FIELD_TOL = 1e-9
IBP_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    run: Callable[[np.random.Generator, Optional[int]], Optional[dict]]
    cap: Optional[int] = None
    repeats: int = 1


# --- random inputs ----------------------------------------------------------------


def _cube(rng: np.random.Generator, N: int, dims: int, kind: str = "rational") -> HyperMatrix:
    return HyperMatrix.random((N,) * dims, kind, rng)


def _subset(rng: np.random.Generator, r: int, n: int) -> MultiIndex:
    return MultiIndex(tuple(sorted(int(i) + 1 for i in rng.choice(n, r, replace=False))), n)


def _random_signal(rng: np.random.Generator) -> UnivariateSignal:
    kind = str(rng.choice(["one", "sin", "cos"]))
    a = int(rng.integers(0, 3))
    if kind == "one":
        return UnivariateSignal.monomial(a)
    omega = float(rng.integers(1, 4))
    return UnivariateSignal.trig(kind, omega, Fraction(int(rng.integers(0, 4)), 4), 1.0, a)


def random_separable(rng: np.random.Generator, N: int, products: int = 2) -> SeparableField:
    """Sum of ``products`` products of x^a, x^a sin(.) or x^a cos(.) factors with small integer data."""
    terms = []
    for _ in range(products):
        c = float(rng.integers(1, 4)) * float(rng.choice([-1.0, 1.0]))
        terms.append((c, tuple(_random_signal(rng) for _ in range(N))))
    return SeparableField(N, terms)


def _as_rational(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


# --- determinant checks -----------------------------------------------------------


def _layer_swap(rng, m=None) -> Optional[dict]:
    dims, N = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    A = _cube(rng, N, dims)
    i = int(rng.integers(1, dims + 1))
    j1, j2 = (int(x) + 1 for x in rng.choice(N, 2, replace=False))
    factor = (-1) ** (dims - 1) if i == 1 else -1
    if det_full(swap_layers(A, i, j1, j2)) == factor * det_full(A):
        return None
    return {"matrix": A.to_dict(), "direction": i, "slots": [j1, j2]}


def _transposition(rng, m=None) -> Optional[dict]:
    dims, N = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    A = _cube(rng, N, dims)
    candidates = np.arange(1, dims + 1) if dims % 2 == 0 else np.arange(2, dims + 1)
    i, j = sorted(int(x) for x in rng.choice(candidates, 2, replace=False))
    if det_full(transpose(A, i, j)) == det_full(A):
        return None
    return {"matrix": A.to_dict(), "directions": [i, j]}


def _ordinary(rng, m=None) -> Optional[dict]:
    N = int(rng.integers(2, 5))
    A = _cube(rng, N, 2)
    value = det_full(A)
    oracle = sympy.Matrix(N, N, [_as_rational(x) for x in A.flat()]).det()
    row = int(rng.integers(1, N + 1))
    full = MultiIndex.full(N)
    if _as_rational(value) == oracle and laplace_expand(A, full, full, row) == value:
        return None
    return {"matrix": A.to_dict(), "row": row, "value": str(value), "oracle": str(oracle)}


def _laplace(rng, m=None) -> Optional[dict]:
    N = int(rng.integers(3, 5))
    r = int(rng.integers(1, N + 1))
    A = _cube(rng, N, 2)
    beta, alpha = _subset(rng, r, N), _subset(rng, r, N)
    i = int(rng.choice(beta.entries))
    if laplace_expand(A, alpha, beta, i) == minor_det(A, MinorSpec(beta, (alpha,))):
        return None
    return {"matrix": A.to_dict(), "beta": list(beta), "alpha": list(alpha), "row": i}


def _layer_fold(rng, m=None) -> Optional[dict]:
    dims, N = int(rng.integers(2, 5)), int(rng.integers(1, 4))
    A = _cube(rng, N, dims)
    if det_layer_fold(A) == det_full(A):
        return None
    return {"matrix": A.to_dict()}


def _multilinear(rng, m=None) -> Optional[dict]:
    dims, N = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    A = _cube(rng, N, dims)
    j = int(rng.integers(1, N + 1))
    L1, L2 = _cube(rng, N, dims - 1), _cube(rng, N, dims - 1)
    a, b = (Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(2))
    if is_multilinear_in_layer(A, 1, j, L1, L2, a, b):
        return None
    return {"matrix": A.to_dict(), "slot": j, "layers": [L1.to_dict(), L2.to_dict()], "coefficients": [str(a), str(b)]}


def _normalization(rng, m=None) -> Optional[dict]:
    dims, N = int(rng.integers(2, 5)), int(rng.integers(3, 5))
    r = int(rng.integers(1, 4 if dims < 4 else 3))
    A = _cube(rng, N, dims)
    picks = [[int(x) + 1 for x in rng.choice(N, r, replace=False)] for _ in range(dims)]
    unsorted = HyperMatrix(A.entries[np.ix_(*[np.array(p) - 1 for p in picks])], "rational")
    spec, sign = MinorSpec.normalized(picks[0], picks[1:], N, N)
    if det_full(unsorted) == sign * minor_det(A, spec):
        return None
    return {"matrix": A.to_dict(), "selections": picks}


# --- field checks --------------------------------------------------------------------


def _points(rng: np.random.Generator, N: int, count: int = 100) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(count, N))


def _entry_scale(mf, pts: np.ndarray, groups: int) -> float:
    r = mf.degree
    biggest = 1.0
    for j in range(r):
        for slots in np.ndindex(*((r,) * groups)):
            biggest = max(biggest, float(np.max(np.abs(mf.entry(j, slots)(pts)))))
    return math.factorial(r) ** groups * biggest**r


def _field_case(rng, m):
    m = m if m in (1, 2, 3) else int(rng.integers(1, 4))
    r = int(rng.integers(2, 4))
    N = max(r, int(rng.integers(2, 4)))
    alphas = tuple(_subset(rng, r, N) for _ in range(m))
    return m, r, N, alphas


def _lemma24(rng, m=None) -> Optional[dict]:
    m, r, N, alphas = _field_case(rng, m)
    v = random_separable(rng, N)
    u = VectorField([v] * r)
    spec = MinorSpec(MultiIndex.full(r), alphas)
    pts = _points(rng, N)
    mf = minor_field(u, m, spec)
    got = mf(pts)
    expected = math.factorial(r) * scalar_minor_field(v, m, alphas)(pts) if m % 2 == 0 else np.zeros(len(pts))
    tol = FIELD_TOL * _entry_scale(mf, pts, m)
    if np.all(np.abs(got - expected) <= tol):
        return None
    return {"field": v.to_dict(), "m": m, "alphas": [list(a) for a in alphas], "max_error": float(np.max(np.abs(got - expected)))}


def _lemma25(rng, m=None) -> Optional[dict]:
    m, r, N, alphas = _field_case(rng, m)
    u = VectorField([random_separable(rng, N, 1 if m == 3 else 2) for _ in range(r)])
    spec = MinorSpec(MultiIndex.full(r), alphas)
    i = int(rng.integers(1, m + 1))
    pts = _points(rng, N)
    mf = minor_field(u, m, spec)
    got = lemma25_expansion(u, m, spec, i)(pts)
    expected = mf(pts)
    tol = FIELD_TOL * _entry_scale(mf, pts, m)
    if np.all(np.abs(got - expected) <= tol):
        return None
    return {"field": u.to_dict(), "m": m, "slot": i, "alphas": [list(a) for a in alphas], "max_error": float(np.max(np.abs(got - expected)))}


def random_ibp_case(
    rng: np.random.Generator, N: int, m: int, r: int = 2
) -> Tuple[VectorField, SeparableField, MinorSpec, BoxDomain]:
    """Random (u, psi, spec, box) on (0, pi)^N with psi a bump times a random field."""
    u = VectorField([random_separable(rng, N) for _ in range(r)])
    bump = plateau_bump(m)
    psi = SeparableField(N, [(1.0, (bump,) * N)]) * random_separable(rng, N, 1)
    spec = MinorSpec(MultiIndex.full(r), tuple(_subset(rng, r, N) for _ in range(m)))
    return u, psi, spec, BoxDomain.cube(0.0, math.pi, N)


def compare_extension_identity(u: VectorField, psi: SeparableField, spec: MinorSpec, box: BoxDomain) -> dict:
    """Both sides of the extension identity, the rhs under two admissible chi, and agreement."""
    m = spec.order
    lhs, rhs = ibp_identity_check(u, psi, m, spec, box, extension_profile(m))
    _, rhs_alt = ibp_identity_check(u, psi, m, spec, box, alternative_extension_profile(m))
    scale = max(1.0, abs(lhs), abs(rhs))
    return {
        "lhs": lhs,
        "rhs": rhs,
        "rhs_alternative_extension": rhs_alt,
        "agrees": abs(lhs - rhs) <= IBP_TOL * scale and abs(rhs - rhs_alt) <= IBP_TOL * scale,
    }


def _ibp(rng, m=None) -> Optional[dict]:
    m = m if m in (1, 2) else int(rng.integers(1, 3))
    N = int(rng.integers(2, 4))
    u, psi, spec, box = random_ibp_case(rng, N, m)
    outcome = compare_extension_identity(u, psi, spec, box)
    if outcome.pop("agrees"):
        return None
    return {"field": u.to_dict(), "psi": psi.to_dict(), "m": m, "alphas": [list(a) for a in spec.alphas], **outcome}


def _difference_pair(rng, m, kind: str) -> Optional[dict]:
    m = m if m in (1, 2, 3) else int(rng.integers(1, 4))
    r = int(rng.integers(2, 4))
    side = r + 1
    A = HyperMatrix.random((side,) * (m + 1), kind, rng)
    B = HyperMatrix.random((side,) * (m + 1), kind, rng)
    spec = MinorSpec(_subset(rng, r, side), tuple(_subset(rng, r, side) for _ in range(m)))
    lhs, rhs = minor_difference_bound(A, B, spec)
    slack = 1 if kind == "rational" else 1 + 1e-12
    if lhs <= rhs * slack:
        return None
    return {"a": A.to_dict(), "b": B.to_dict(), "spec": str(spec), "lhs": lhs, "rhs": rhs}


def _difference_bound(rng, m=None) -> Optional[dict]:
    return _difference_pair(rng, m, "f64")


def _difference_bound_exact(rng, m=None) -> Optional[dict]:
    return _difference_pair(rng, m, "rational")


CHECKS: List[Check] = [
    Check("layer_swap", "lemmas", _layer_swap),
    Check("transposition", "lemmas", _transposition),
    Check("ordinary_determinant", "lemmas", _ordinary),
    Check("laplace", "lemmas", _laplace),
    Check("layer_fold", "lemmas", _layer_fold),
    Check("multilinear", "lemmas", _multilinear),
    Check("selection_sign", "lemmas", _normalization),
    Check("repeated_rows", "lemmas", _lemma24, cap=50),
    Check("slot_expansion", "lemmas", _lemma25, cap=50),
    Check("extension_identity", "ibp", _ibp, cap=10),
    Check("difference_bound", "bounds", _difference_bound, repeats=50),
    Check("difference_bound_exact", "bounds", _difference_bound_exact),
]


def _run_check(index: int, check: Check, seed: int, trials: int, m: Optional[int]) -> dict:
    rng = np.random.default_rng([seed, index])
    count = (min(trials, check.cap) if check.cap else trials) * check.repeats
    passed, failures = 0, []
    for trial in range(count):
        failure = check.run(rng, m)
        if failure is None:
            passed += 1
        else:
            failure["trial"] = trial
            failures.append(failure)
    if failures:
        logger.warning("%s: %d of %d trials failed", check.name, len(failures), count)
    return {
        "name": check.name,
        "suite": check.suite,
        "trials": count,
        "passed": passed,
        "failed": len(failures),
        "failures": failures[:MAX_FAILURES],
    }


def run_lemma_suite(
    seed: Optional[int] = None,
    trials: int = 200,
    suite: str = "all",
    workers: int = 1,
    m: Optional[int] = None,
) -> dict:
    """Run the selected checks and return the report document.

    Args:
        seed: base seed, ``Settings.seed`` when omitted
        trials: trials per check (some checks cap or multiply it)
        suite: one of ``SUITES``
        workers: joblib workers across checks
        m: restrict field and extension checks to this derivative order

    Returns:
        dict with per-check counts and an overall ``passed`` flag
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}, expected one of {', '.join(SUITES)}")
    if trials < 1:
        raise ConfigError(f"trials must be positive, got {trials}")
    seed = get_settings().seed if seed is None else seed
    selected = [(i, c) for i, c in enumerate(CHECKS) if suite == "all" or c.suite == suite]
    if workers > 1:
        results = Parallel(n_jobs=workers)(delayed(_run_check)(i, c, seed, trials, m) for i, c in selected)
    else:
        results = [_run_check(i, c, seed, trials, m) for i, c in selected]
    return {
        "suite": suite,
        "seed": seed,
        "trials": trials,
        "m": m,
        "checks": results,
        "passed": all(r["failed"] == 0 for r in results),
    }
