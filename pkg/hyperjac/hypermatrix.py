"""m-dimensional matrices and their full signed (Cayley) determinant.

A HyperMatrix with orders (N1, ..., Nm) stores a_{l1...lm} row-major, last
index fastest, either as float64 or as exact ``Fraction`` objects.  All
public indices (directions, slots, multi-index entries) are 1-based.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
from joblib import Parallel, delayed
from pydantic import BaseModel, PositiveInt, ValidationError

from .config import get_settings
from .errors import BudgetError, DomainError
from .multiindex import MultiIndex, permutation_sign, remove, sigma, signed_permutations

__all__ = [
    "HyperMatrix",
    "MinorSpec",
    "layer",
    "replace_layer",
    "swap_layers",
    "transpose",
    "permutation_terms",
    "det_full",
    "det_layer_fold",
    "det_full_batch",
    "minor",
    "minor_det",
    "laplace_expand",
    "adjugate_entry",
    "sup_norm",
    "minor_difference_bound",
    "is_multilinear_in_layer",
]

logger = logging.getLogger(__name__)

ScalarKind = Literal["f64", "rational"]
Scalar = Union[float, Fraction]

# rows per vectorized gather in det_full
_CHUNK = 8192


def _to_fraction_array(values, shape) -> np.ndarray:
    flat = [Fraction(v) for v in np.asarray(values, dtype=object).ravel().tolist()]
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(shape)


class MatrixPayload(BaseModel):
    orders: List[PositiveInt]
    scalar: Literal["f64", "rational"] = "f64"
    entries: List[Union[int, float, str]]


class HyperMatrix:
    """Immutable dense m-dimensional matrix.

    Args:
        entries: array-like of shape (N1, ..., Nm)
        kind: ``"f64"`` or ``"rational"``
    """

    __slots__ = ("_entries", "kind")

    def __init__(self, entries, kind: ScalarKind = "f64"):
        if kind not in ("f64", "rational"):
            raise DomainError(f"unknown scalar kind {kind!r}")
        if kind == "f64":
            arr = np.array(entries, dtype=float)
        else:
            shape = np.shape(entries) if not isinstance(entries, np.ndarray) else entries.shape
            arr = _to_fraction_array(entries, shape)
        arr.setflags(write=False)
        self._entries = arr
        self.kind = kind

    # --- construction ---------------------------------------------------
    @classmethod
    def from_flat(cls, orders: Sequence[int], entries: Sequence, kind: ScalarKind = "f64") -> "HyperMatrix":
        orders = tuple(int(n) for n in orders)
        if any(n < 1 for n in orders):
            raise DomainError(f"orders must be positive, got {orders}")
        if len(entries) != math.prod(orders):
            raise DomainError(f"expected {math.prod(orders)} entries for orders {orders}, got {len(entries)}")
        if kind == "f64":
            values = [float(Fraction(e)) if isinstance(e, str) else float(e) for e in entries]
            return cls(np.array(values, dtype=float).reshape(orders), "f64")
        return cls(_to_fraction_array(list(entries), orders), "rational")

    @classmethod
    def random(
        cls,
        orders: Sequence[int],
        kind: ScalarKind = "rational",
        rng: Optional[np.random.Generator] = None,
        bound: int = 9,
        max_denominator: int = 4,
    ) -> "HyperMatrix":
        """Random matrix with small rational (or uniform float) entries."""
        rng = rng if rng is not None else np.random.default_rng()
        orders = tuple(orders)
        size = math.prod(orders)
        if kind == "f64":
            return cls(rng.uniform(-1.0, 1.0, size=orders), "f64")
        nums = rng.integers(-bound, bound + 1, size=size).tolist()
        dens = rng.integers(1, max_denominator + 1, size=size).tolist()
        return cls.from_flat(orders, [Fraction(a, b) for a, b in zip(nums, dens)], "rational")

    @classmethod
    def zeros(cls, orders: Sequence[int], kind: ScalarKind = "f64") -> "HyperMatrix":
        size = math.prod(orders)
        return cls.from_flat(orders, [0] * size, kind)

    # --- accessors ------------------------------------------------------
    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(self._entries.shape)

    @property
    def dims(self) -> int:
        return self._entries.ndim

    def __getitem__(self, index: Sequence[int]) -> Scalar:
        """Entry at a 1-based multi-index."""
        return self._entries[tuple(i - 1 for i in index)]

    def flat(self) -> list:
        return self._entries.ravel().tolist()

    def zero(self) -> Scalar:
        return 0.0 if self.kind == "f64" else Fraction(0)

    def one(self) -> Scalar:
        return 1.0 if self.kind == "f64" else Fraction(1)

    def astype(self, kind: ScalarKind) -> "HyperMatrix":
        if kind == self.kind:
            return self
        if kind == "f64":
            return HyperMatrix(np.array([float(x) for x in self.flat()]).reshape(self.orders), "f64")
        return HyperMatrix(_to_fraction_array(self.flat(), self.orders), "rational")

    def equals(self, other: "HyperMatrix") -> bool:
        return self.orders == other.orders and self.flat() == other.flat()

    def _combine(self, other: "HyperMatrix", op) -> "HyperMatrix":
        if self.orders != other.orders:
            raise DomainError(f"order mismatch {self.orders} vs {other.orders}")
        kind = "rational" if self.kind == other.kind == "rational" else "f64"
        left, right = self.astype(kind), other.astype(kind)
        return HyperMatrix(op(left._entries, right._entries), kind)

    def __add__(self, other: "HyperMatrix") -> "HyperMatrix":
        return self._combine(other, np.add)

    def __sub__(self, other: "HyperMatrix") -> "HyperMatrix":
        return self._combine(other, np.subtract)

    def scaled(self, c: Scalar) -> "HyperMatrix":
        if self.kind == "rational":
            c = Fraction(c)
        return HyperMatrix(self._entries * c, self.kind)

    def __repr__(self) -> str:
        return f"HyperMatrix(orders={self.orders}, kind={self.kind!r})"

    # --- JSON -----------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "f64":
            entries = [float(x) for x in self.flat()]
        else:
            entries = [str(x) for x in self.flat()]
        return {"orders": list(self.orders), "scalar": self.kind, "entries": entries}

    def to_json(self) -> bytes:
        return orjson.dumps(self.to_dict())

    @classmethod
    def from_json(cls, raw: Union[str, bytes]) -> "HyperMatrix":
        try:
            payload = MatrixPayload.model_validate(orjson.loads(raw))
        except (orjson.JSONDecodeError, ValidationError) as e:
            raise DomainError(f"malformed matrix JSON: {e}") from e
        try:
            return cls.from_flat(payload.orders, payload.entries, payload.scalar)
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"malformed matrix entries: {e}") from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> "HyperMatrix":
        return cls.from_json(Path(path).read_bytes())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_json())


@dataclass(frozen=True)
class MinorSpec:
    """Selector (beta, alpha^1, ..., alpha^m) of common degree r.

    ``beta`` selects along direction 1, ``alphas[s]`` along direction s + 2.
    """

    beta: MultiIndex
    alphas: Tuple[MultiIndex, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        r = len(self.beta)
        if any(len(a) != r for a in self.alphas):
            raise DomainError(
                f"minor selectors need a common degree, got {[len(self.beta)] + [len(a) for a in self.alphas]}"
            )

    @property
    def degree(self) -> int:
        return len(self.beta)

    @property
    def order(self) -> int:
        """Number of derivative directions m (the matrix has m + 1 directions)."""
        return len(self.alphas)

    @property
    def selectors(self) -> Tuple[MultiIndex, ...]:
        return (self.beta,) + self.alphas

    @classmethod
    def build(cls, beta: Sequence[int], alphas: Sequence[Sequence[int]], n: int, N: int) -> "MinorSpec":
        return cls(MultiIndex(tuple(beta), n), tuple(MultiIndex(tuple(a), N) for a in alphas))

    @classmethod
    def full(cls, n: int, N: int, m: int) -> "MinorSpec":
        r = min(n, N)
        return cls.build(range(1, r + 1), [range(1, r + 1)] * m, n, N)

    @classmethod
    def normalized(
        cls, beta: Sequence[int], alphas: Sequence[Sequence[int]], n: int, N: int
    ) -> Tuple["MinorSpec", int]:
        """Sort unsorted selections, returning the spec and the sign picked up.

        Reordering the first direction permutes 1-layers, each transposition
        costing (-1)^(dims-1); other directions cost -1 per transposition.
        """
        dims = 1 + len(alphas)
        sign = permutation_sign(beta) ** (dims - 1)
        for a in alphas:
            sign *= permutation_sign(a)
        return cls.build(sorted(beta), [sorted(a) for a in alphas], n, N), sign

    def __str__(self) -> str:
        return f"beta={self.beta} alphas=" + ",".join(str(a) for a in self.alphas)


# --- layers and transpositions --------------------------------------------


def _check_direction(A: HyperMatrix, i: int) -> None:
    if not 1 <= i <= A.dims:
        raise DomainError(f"direction {i} outside 1..{A.dims}")


def _check_slot(A: HyperMatrix, i: int, j: int) -> None:
    _check_direction(A, i)
    if not 1 <= j <= A.orders[i - 1]:
        raise DomainError(f"slot {j} outside 1..{A.orders[i - 1]} in direction {i}")


def layer(A: HyperMatrix, i: int, j: int) -> HyperMatrix:
    """The j-th i-layer of A, an (m-1)-dimensional matrix."""
    _check_slot(A, i, j)
    sliced = np.asarray(np.take(A.entries, j - 1, axis=i - 1), dtype=A.entries.dtype)
    return HyperMatrix(sliced, A.kind)


def replace_layer(A: HyperMatrix, i: int, j: int, L: HyperMatrix) -> HyperMatrix:
    _check_slot(A, i, j)
    expected = A.orders[: i - 1] + A.orders[i:]
    if L.orders != expected:
        raise DomainError(f"layer has orders {L.orders}, expected {expected}")
    arr = A.entries.copy()
    index = [slice(None)] * A.dims
    index[i - 1] = j - 1
    arr[tuple(index)] = L.astype(A.kind).entries
    return HyperMatrix(arr, A.kind)


def swap_layers(A: HyperMatrix, i: int, j1: int, j2: int) -> HyperMatrix:
    _check_slot(A, i, j1)
    _check_slot(A, i, j2)
    order = list(range(A.orders[i - 1]))
    order[j1 - 1], order[j2 - 1] = order[j2 - 1], order[j1 - 1]
    return HyperMatrix(np.take(A.entries, order, axis=i - 1), A.kind)


def transpose(A: HyperMatrix, i: int, j: int) -> HyperMatrix:
    """The (i, j)-transposition: swap index directions i and j."""
    _check_direction(A, i)
    _check_direction(A, j)
    if A.orders[i - 1] != A.orders[j - 1]:
        raise DomainError(f"cannot transpose directions {i},{j} with orders {A.orders[i - 1]} != {A.orders[j - 1]}")
    return HyperMatrix(np.swapaxes(A.entries, i - 1, j - 1), A.kind)


# --- determinants -----------------------------------------------------------


@lru_cache(maxsize=16)
def _permutation_table(N: int) -> Tuple[np.ndarray, np.ndarray]:
    perms, signs = zip(*signed_permutations(N))
    return np.array(perms, dtype=np.intp).reshape(len(perms), N), np.array(signs, dtype=np.int64)


def permutation_terms(N: int, dims: int) -> int:
    """Number of product terms (N!)^(dims-1) in the full signed determinant."""
    return math.factorial(N) ** max(dims - 1, 0)


def _cube_side(A: HyperMatrix) -> int:
    if A.dims == 0:
        return 1
    if len(set(A.orders)) != 1:
        raise DomainError(f"determinant needs a cubical matrix, got orders {A.orders}")
    return A.orders[0]


def _check_budget(N: int, dims: int, budget: Optional[int]) -> None:
    budget = get_settings().budget if budget is None else budget
    required = permutation_terms(N, dims)
    if required > budget:
        raise BudgetError(required, budget)


def det_full(A: HyperMatrix, budget: Optional[int] = None) -> Scalar:
    """Full signed determinant by brute force over (S_N)^(m-1).

    Terms are visited in a fixed order, so float results are reproducible.
    """
    N = _cube_side(A)
    _check_budget(N, A.dims, budget)
    arr = A.entries
    if A.dims == 0:
        return arr[()]
    if A.dims == 1:
        return math.prod(arr.tolist()) if A.kind == "f64" else math.prod(arr.tolist(), start=Fraction(1))

    perms, signs = _permutation_table(N)
    groups = A.dims - 1
    count = len(perms) ** groups
    rows = np.arange(N)[None, :]
    total = A.zero()
    for start in range(0, count, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, count))
        digits = np.unravel_index(ids, (len(perms),) * groups)
        vals = arr[(np.broadcast_to(rows, (len(ids), N)),) + tuple(perms[d] for d in digits)]
        products = np.multiply.reduce(vals, axis=1)
        term_signs = np.multiply.reduce(np.stack([signs[d] for d in digits]), axis=0)
        if A.kind == "f64":
            total += float(np.dot(term_signs.astype(float), products))
        else:
            total += sum((s * p for s, p in zip(term_signs.tolist(), products.tolist())), Fraction(0))
    return total


def det_full_batch(values: np.ndarray) -> np.ndarray:
    """Full signed determinants of a stack of float cubes of shape (P, r, ..., r)."""
    values = np.asarray(values, dtype=float)
    dims = values.ndim - 1
    if dims == 0:
        return values.copy()
    r = values.shape[1]
    perms, signs = _permutation_table(r)
    rows = np.arange(r)
    total = np.zeros(values.shape[0])
    for combo in product(range(len(perms)), repeat=dims - 1):
        sign = math.prod(int(signs[c]) for c in combo)
        picked = values[(slice(None), rows) + tuple(perms[c] for c in combo)]
        total += sign * np.prod(picked, axis=1)
    return total


def _eliminate(arr: np.ndarray, kind: ScalarKind) -> Scalar:
    """Ordinary determinant by Gaussian elimination (exact for Fractions)."""
    n = arr.shape[0]
    if kind == "f64":
        return float(np.linalg.det(arr)) if n else 1.0
    X = arr.copy()
    det = Fraction(1)
    for i in range(n):
        pivot = next((j for j in range(i, n) if X[j, i] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != i:
            X[[i, pivot]] = X[[pivot, i]]
            det = -det
        det *= X[i, i]
        for j in range(i + 1, n):
            if X[j, i] != 0:
                X[j, i:] = X[j, i:] - (X[j, i] / X[i, i]) * X[i, i:]
    return det


def _fold(arr: np.ndarray, kind: ScalarKind) -> Scalar:
    if arr.ndim == 0:
        return arr[()]
    if arr.ndim == 1:
        return math.prod(arr.tolist(), start=1.0 if kind == "f64" else Fraction(1))
    if arr.ndim == 2:
        return _eliminate(arr, kind)
    N = arr.shape[0]
    perms, signs = _permutation_table(N)
    return _fold_chunk(arr, kind, perms, signs)


def _fold_chunk(arr: np.ndarray, kind: ScalarKind, perms: np.ndarray, signs: np.ndarray) -> Scalar:
    rows = np.arange(arr.shape[0])
    total = 0.0 if kind == "f64" else Fraction(0)
    for perm, sign in zip(perms, signs.tolist()):
        folded = _fold(arr[rows, perm], kind)
        total = total + folded if sign > 0 else total - folded
    return total


def det_layer_fold(A: HyperMatrix, budget: Optional[int] = None, workers: int = 1) -> Scalar:
    """Full signed determinant as a signed sum of (m-1)-dimensional determinants.

    det A = sum over tau2 of sign(tau2) * det B, with B_{i l3...} = a_{i tau2(i) l3...};
    ordinary 2-dimensional determinants at the bottom use elimination.  The
    outermost sum is split into ``workers`` contiguous blocks, each summed in
    order, and the block sums are reduced in block order.
    """
    N = _cube_side(A)
    _check_budget(N, A.dims, budget)
    if A.dims <= 2 or workers <= 1:
        return _fold(A.entries, A.kind)
    perms, signs = _permutation_table(N)
    blocks = np.array_split(np.arange(len(perms)), min(workers, len(perms)))
    partials = Parallel(n_jobs=workers)(
        delayed(_fold_chunk)(A.entries, A.kind, perms[b], signs[b]) for b in blocks
    )
    total = A.zero()
    for part in partials:
        total += part
    return total


# --- minors -----------------------------------------------------------------


def _selectors_for(A: HyperMatrix, spec: MinorSpec) -> Tuple[MultiIndex, ...]:
    selectors = spec.selectors
    if len(selectors) != A.dims:
        raise DomainError(f"spec selects {len(selectors)} directions, matrix has {A.dims}")
    for d, (sel, n) in enumerate(zip(selectors, A.orders), start=1):
        if sel.entries and sel.entries[-1] > n:
            raise DomainError(f"index {sel.entries} exceeds order {n} in direction {d}")
    return selectors


def minor(A: HyperMatrix, spec: MinorSpec) -> HyperMatrix:
    """The r^(m) cube b_{l1...} = a_{alpha1_{l1} ...}."""
    selectors = _selectors_for(A, spec)
    sub = A.entries[np.ix_(*[np.array(s.zero_based(), dtype=np.intp) for s in selectors])]
    return HyperMatrix(sub, A.kind)


def minor_det(A: HyperMatrix, spec: MinorSpec, budget: Optional[int] = None) -> Scalar:
    """Determinant of the (beta, alpha) minor; degree 0 gives 1."""
    _selectors_for(A, spec)
    if spec.degree == 0:
        return A.one()
    return det_full(minor(A, spec), budget=budget)


def adjugate_entry(A: HyperMatrix, alpha: MultiIndex, beta: MultiIndex, i: int, j: int) -> Scalar:
    """(adj A^beta_alpha)^i_j = sigma(i, beta-i) sigma(j, alpha-j) det A^{beta-i}_{alpha-j}."""
    sub = MinorSpec(remove(beta, i), (remove(alpha, j),))
    return sigma(i, remove(beta, i)) * sigma(j, remove(alpha, j)) * minor_det(A, sub)


def laplace_expand(A: HyperMatrix, alpha: MultiIndex, beta: MultiIndex, i: int) -> Scalar:
    """Expansion of the ordinary minor det A^beta_alpha along row i of beta."""
    if A.dims != 2:
        raise DomainError(f"Laplace expansion needs a 2-dimensional matrix, got {A.dims}")
    if i not in beta:
        raise DomainError(f"row {i} is not in beta={beta.entries}")
    total = A.zero()
    for j in alpha:
        total += A[(i, j)] * adjugate_entry(A, alpha, beta, i, j)
    return total


def sup_norm(A: HyperMatrix) -> Scalar:
    values = [abs(x) for x in A.flat()]
    return max(values) if values else A.zero()


def minor_difference_bound(A: HyperMatrix, B: HyperMatrix, spec: MinorSpec) -> Tuple[Scalar, Scalar]:
    """Both sides of |M(A) - M(B)| <= (r!)^g r |A-B| (|A|^(r-1) + |B|^(r-1)).

    g = dims - 1 is the number of permutation groups in the determinant.
    """
    if A.orders != B.orders:
        raise DomainError(f"order mismatch {A.orders} vs {B.orders}")
    kind = "rational" if A.kind == B.kind == "rational" else "f64"
    A, B = A.astype(kind), B.astype(kind)
    r = spec.degree
    lhs = abs(minor_det(A, spec) - minor_det(B, spec))
    if r == 0:
        return lhs, A.zero()
    groups = A.dims - 1
    rhs = math.factorial(r) ** groups * r * sup_norm(A - B) * (sup_norm(A) ** (r - 1) + sup_norm(B) ** (r - 1))
    return lhs, rhs


def is_multilinear_in_layer(
    A: HyperMatrix, i: int, j: int, L1: HyperMatrix, L2: HyperMatrix, a: Scalar, b: Scalar
) -> bool:
    """det is linear in the j-th i-layer: det(.., aL1 + bL2, ..) = a det(.., L1, ..) + b det(.., L2, ..).

    Exact in rational mode; float mode compares to 1e-9 of the term scale.
    """
    mixed = replace_layer(A, i, j, L1.scaled(a) + L2.scaled(b))
    lhs = det_full(mixed)
    rhs = a * det_full(replace_layer(A, i, j, L1)) + b * det_full(replace_layer(A, i, j, L2))
    if A.kind == "rational" and L1.kind == L2.kind == "rational":
        return lhs == rhs
    scale = max(1.0, abs(float(lhs)), abs(float(rhs)))
    return abs(float(lhs) - float(rhs)) <= 1e-9 * scale
