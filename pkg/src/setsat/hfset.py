"""Hereditarily finite sets with hash-consing and a canonical total order.

Every distinct set is stored once, so equality is identity and hashing is
O(1).  The canonical order compares rank first and then the ascending
element lists lexicographically.
"""

from __future__ import annotations

import functools
import itertools
import threading
from typing import Iterable, Iterator, Sequence

from .errors import ResourceLimitError

POWER_LIMIT = 20
LEVEL_LIMIT = 5


@functools.total_ordering
class HFSet:
    __slots__ = ("_elements", "_members", "_rank", "_key", "__weakref__")

    _table: dict[frozenset, "HFSet"] = {}
    _lock = threading.Lock()

    def __new__(cls, elements: Iterable["HFSet"] = ()) -> "HFSet":
        members = frozenset(elements)
        found = cls._table.get(members)
        if found is not None:
            return found
        for e in members:
            if not isinstance(e, HFSet):
                raise TypeError(f"HFSet elements must be HFSet, got {type(e).__name__}")
        ordered = tuple(sorted(members, key=_sort_key))
        obj = object.__new__(cls)
        obj._members = members
        obj._elements = ordered
        obj._rank = 1 + max(e._rank for e in ordered) if ordered else 0
        obj._key = (obj._rank, tuple(e._key for e in ordered))
        with cls._lock:
            return cls._table.setdefault(members, obj)

    # identity semantics: interning makes structural equality coincide with `is`
    __hash__ = object.__hash__

    def __eq__(self, other: object) -> bool:
        return self is other

    def __lt__(self, other: "HFSet") -> bool:
        if not isinstance(other, HFSet):
            return NotImplemented
        return self._key < other._key

    def __reduce__(self):
        return (HFSet, (self._elements,))

    def __copy__(self) -> "HFSet":
        return self

    def __deepcopy__(self, memo) -> "HFSet":
        return self

    @property
    def elements(self) -> tuple["HFSet", ...]:
        return self._elements

    @property
    def members(self) -> frozenset["HFSet"]:
        return self._members

    @property
    def rank(self) -> int:
        return self._rank

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self) -> Iterator["HFSet"]:
        return iter(self._elements)

    def __contains__(self, item: object) -> bool:
        return item in self._members

    def __bool__(self) -> bool:
        return bool(self._elements)

    def issubset(self, other: "HFSet") -> bool:
        return self._members <= other._members

    def union(self, *others: "HFSet") -> "HFSet":
        return HFSet(self._members.union(*(o._members for o in others)))

    def intersection(self, other: "HFSet") -> "HFSet":
        return HFSet(self._members & other._members)

    def difference(self, other: "HFSet") -> "HFSet":
        return HFSet(self._members - other._members)

    def to_json(self):
        return [e.to_json() for e in self._elements]

    @classmethod
    def from_json(cls, data) -> "HFSet":
        if not isinstance(data, list):
            raise ValueError(f"expected a nested list, got {data!r}")
        return cls(cls.from_json(d) for d in data)

    def __repr__(self) -> str:
        return f"HFSet({_compact(self)})"

    def __str__(self) -> str:
        return _compact(self)


def _sort_key(s: HFSet):
    return s._key


def _compact(s: HFSet) -> str:
    if not s._elements:
        return "0"
    return "{" + ",".join(_compact(e) for e in s._elements) + "}"


EMPTY = HFSet()


def hf(*elements: HFSet) -> HFSet:
    """Shorthand constructor: ``hf()`` is the empty set, ``hf(hf())`` is {∅}."""
    return HFSet(elements)


def von_neumann(n: int) -> HFSet:
    s = EMPTY
    for _ in range(n):
        s = HFSet(s.members | {s})
    return s


def rank(s: HFSet) -> int:
    return s.rank


def canonical(items: Iterable[HFSet]) -> list[HFSet]:
    """Sort HF sets into canonical order."""
    return sorted(items, key=_sort_key)


def union_all(sets: Iterable[Iterable[HFSet]]) -> HFSet:
    out: set[HFSet] = set()
    for s in sets:
        out.update(s)
    return HFSet(out)


def trcl(s: HFSet) -> HFSet:
    seen: set[HFSet] = set()
    stack = list(s)
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(x)
    return HFSet(seen)


def is_transitive(domain: Iterable[HFSet]) -> bool:
    dom = domain if isinstance(domain, (set, frozenset)) else frozenset(domain)
    return all(m in dom for x in dom for m in x)


def _check_size(n: int, limit: int) -> None:
    if n > limit:
        raise ResourceLimitError(f"powerset of a {n}-element set exceeds the limit of {limit}")


def subsets(items: Sequence[HFSet], nonempty: bool = False) -> Iterator[tuple[HFSet, ...]]:
    start = 1 if nonempty else 0
    for size in range(start, len(items) + 1):
        yield from itertools.combinations(items, size)


def power(s: HFSet, limit: int = POWER_LIMIT) -> HFSet:
    _check_size(len(s), limit)
    return HFSet(HFSet(c) for c in subsets(s.elements))


def pow_star(blocks: Iterable[Iterable[HFSet]], limit: int = POWER_LIMIT) -> frozenset[HFSet]:
    """Subsets of the union of ``blocks`` that meet every block.

    With no blocks the result is {∅}; if any block is empty it is ∅.
    """
    groups = [canonical(b) for b in blocks]
    if any(not g for g in groups):
        return frozenset()
    _check_size(sum(len(g) for g in groups), limit)
    choices = [list(subsets(g, nonempty=True)) for g in groups]
    out = set()
    for combo in itertools.product(*choices):
        out.add(HFSet(itertools.chain.from_iterable(combo)))
    return frozenset(out)


def pow_star_size(blocks: Iterable[Iterable[HFSet]]) -> int:
    size = 1
    for b in blocks:
        size *= (1 << len(b)) - 1
    return size


def in_pow_star(x: HFSet, blocks: Iterable[Iterable[HFSet]]) -> bool:
    """Membership test for ``pow_star(blocks)`` without enumerating it."""
    blocks = [b if isinstance(b, (set, frozenset)) else frozenset(b) for b in blocks]
    covered = 0
    for b in blocks:
        hit = sum(1 for m in x if m in b)
        if hit == 0:
            return False
        covered += hit
    return covered == len(x)


_levels: list[tuple[HFSet, ...]] = [()]
_levels_lock = threading.Lock()


def enumerate_level(r: int, limit: int = LEVEL_LIMIT) -> tuple[HFSet, ...]:
    """All HF sets of rank < r, in canonical order (|V_{k+1}| = 2**|V_k|)."""
    if r < 0:
        raise ValueError("level must be non-negative")
    if r > limit:
        raise ResourceLimitError(f"level {r} exceeds the enumeration limit {limit}")
    with _levels_lock:
        while len(_levels) <= r:
            prev = _levels[-1]
            _levels.append(tuple(canonical(HFSet(c) for c in subsets(prev))))
        return _levels[r]
