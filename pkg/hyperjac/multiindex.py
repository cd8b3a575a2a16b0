"""Ordered multi-indices and permutation signs.

Indices are 1-based. A multi-index of length 0 is the empty index, for which
``sigma((), ()) == 1``.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

from .errors import DomainError

__all__ = [
    "MultiIndex",
    "SignedPermutation",
    "enumerate_indices",
    "complement",
    "remove",
    "insert",
    "sigma",
    "permutation_sign",
    "signed_permutations",
]

IndexLike = Union["MultiIndex", Sequence[int], int]


@dataclass(frozen=True)
class MultiIndex:
    """Strictly increasing tuple of integers in ``1..ambient``."""

    entries: Tuple[int, ...]
    ambient: int

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.ambient < 0:
            raise DomainError(f"ambient must be non-negative, got {self.ambient}")
        if len(entries) > self.ambient:
            raise DomainError(f"index {entries} longer than ambient {self.ambient}")
        for a, b in zip(entries, entries[1:]):
            if a >= b:
                raise DomainError(f"index {entries} is not strictly increasing")
        if entries and (entries[0] < 1 or entries[-1] > self.ambient):
            raise DomainError(f"index {entries} leaves 1..{self.ambient}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __contains__(self, i: int) -> bool:
        return i in self.entries

    def __getitem__(self, pos: int) -> int:
        return self.entries[pos]

    def position(self, i: int) -> int:
        """1-based position of ``i`` in the index."""
        if i not in self.entries:
            raise DomainError(f"{i} is not an element of {self.entries}")
        return self.entries.index(i) + 1

    def lift(self, ambient: int) -> "MultiIndex":
        """Same entries inside a larger ambient set."""
        return MultiIndex(self.entries, ambient)

    def zero_based(self) -> Tuple[int, ...]:
        return tuple(e - 1 for e in self.entries)

    @classmethod
    def full(cls, n: int) -> "MultiIndex":
        return cls(tuple(range(1, n + 1)), n)

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"


def enumerate_indices(k: int, n: int) -> List[MultiIndex]:
    """All elements of I(k, n) in lexicographic order."""
    if k < 0 or n < 0 or k > n:
        raise DomainError(f"I(k, n) needs 0 <= k <= n, got k={k}, n={n}")
    return [MultiIndex(c, n) for c in combinations(range(1, n + 1), k)]


def complement(a: MultiIndex) -> MultiIndex:
    return MultiIndex(tuple(i for i in range(1, a.ambient + 1) if i not in a), a.ambient)


def remove(a: MultiIndex, i: int) -> MultiIndex:
    """The index a - i."""
    if i not in a:
        raise DomainError(f"cannot remove {i}: not in {a.entries}")
    return MultiIndex(tuple(e for e in a.entries if e != i), a.ambient)


def insert(a: MultiIndex, j: int) -> MultiIndex:
    """The index a + j."""
    if j in a:
        raise DomainError(f"cannot insert {j}: already in {a.entries}")
    if j < 1 or j > a.ambient:
        raise DomainError(f"cannot insert {j}: outside 1..{a.ambient}")
    return MultiIndex(tuple(sorted(a.entries + (j,))), a.ambient)


def _as_tuple(a: IndexLike) -> Tuple[int, ...]:
    if isinstance(a, MultiIndex):
        return a.entries
    if isinstance(a, int):
        return (a,)
    return tuple(int(x) for x in a)


def permutation_sign(seq: Iterable[int]) -> int:
    """Parity of the permutation sorting ``seq``, by inversion count."""
    items = list(seq)
    inversions = sum(1 for x in range(len(items)) for y in range(x + 1, len(items)) if items[x] > items[y])
    return -1 if inversions % 2 else 1


def sigma(a: IndexLike, b: IndexLike) -> int:
    """Sign of the permutation that reorders the concatenation (a, b) increasingly.

    Either argument may be a MultiIndex, a plain sequence or a single integer.
    """
    left, right = _as_tuple(a), _as_tuple(b)
    if set(left) & set(right):
        raise DomainError(f"sigma needs disjoint indices, got {left} and {right}")
    # only cross inversions matter when both halves are increasing
    if list(left) == sorted(left) and list(right) == sorted(right):
        crossings = sum(1 for x in left for y in right if x > y)
        return -1 if crossings % 2 else 1
    return permutation_sign(left + right)


@dataclass(frozen=True)
class SignedPermutation:
    """A permutation of 1..r with its sign."""

    images: Tuple[int, ...]
    sign: int

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise DomainError(f"{self.images} is not a permutation of 1..{len(self.images)}")
        if self.sign != permutation_sign(self.images):
            raise DomainError(f"sign {self.sign} does not match parity of {self.images}")

    @classmethod
    def from_images(cls, images: Sequence[int]) -> "SignedPermutation":
        images = tuple(int(i) for i in images)
        return cls(images, permutation_sign(images))

    def __call__(self, i: int) -> int:
        return self.images[i - 1]


def signed_permutations(r: int) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """Yield every permutation of ``range(r)`` (0-based) with its sign.

    Heap's order: consecutive permutations differ by one transposition, so the
    sign flips at every step.
    """
    if r < 0:
        raise DomainError(f"permutation size must be non-negative, got {r}")
    perm = list(range(r))
    sign = 1
    yield tuple(perm), sign
    counters = [0] * r
    i = 1
    while i < r:
        if counters[i] < i:
            if i % 2 == 0:
                perm[0], perm[i] = perm[i], perm[0]
            else:
                perm[counters[i]], perm[i] = perm[i], perm[counters[i]]
            sign = -sign
            yield tuple(perm), sign
            counters[i] += 1
            i = 1
        else:
            counters[i] = 0
            i += 1
