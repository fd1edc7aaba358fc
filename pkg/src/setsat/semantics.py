"""Evaluation of terms and literals, Venn partitions and the outer region."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .hfset import EMPTY, HFSet, canonical, is_transitive, power, trcl, union_all
from .syntax import (
    And, Diff, EmptySet, Enum, Eq, Finite, Formula, In, Inter, Literal,
    NormalizedConjunction, Not, Or, Pow, Subseteq, Term, Union_, Var,
)

Assignment = Mapping[str, HFSet]


class UnboundVariable(KeyError):
    pass


def _lookup(M: Assignment, name: str) -> HFSet:
    try:
        return M[name]
    except KeyError:
        raise UnboundVariable(name) from None


def eval_term(t: Term, M: Assignment) -> HFSet:
    if isinstance(t, Var):
        return _lookup(M, t.name)
    if isinstance(t, EmptySet):
        return EMPTY
    if isinstance(t, Union_):
        return eval_term(t.left, M).union(eval_term(t.right, M))
    if isinstance(t, Inter):
        return eval_term(t.left, M).intersection(eval_term(t.right, M))
    if isinstance(t, Diff):
        return eval_term(t.left, M).difference(eval_term(t.right, M))
    if isinstance(t, Pow):
        return power(eval_term(t.arg, M))
    if isinstance(t, Enum):
        return HFSet(eval_term(i, M) for i in t.items)
    raise TypeError(f"not a term: {t!r}")


def holds_formula(f: Formula, M: Assignment) -> bool:
    if isinstance(f, Eq):
        return eval_term(f.left, M) is eval_term(f.right, M)
    if isinstance(f, In):
        return eval_term(f.left, M) in eval_term(f.right, M)
    if isinstance(f, Subseteq):
        return eval_term(f.left, M).issubset(eval_term(f.right, M))
    if isinstance(f, Finite):
        eval_term(f.arg, M)
        return True  # every HF set is finite
    if isinstance(f, Not):
        return not holds_formula(f.arg, M)
    if isinstance(f, And):
        return all(holds_formula(a, M) for a in f.args)
    if isinstance(f, Or):
        return any(holds_formula(a, M) for a in f.args)
    raise TypeError(f"not a formula: {f!r}")


def holds(lit: Literal, M: Assignment) -> bool:
    k = lit.kind
    v = [_lookup(M, a) for a in lit.args]
    if k == "eq":
        return v[0] is v[1]
    if k == "neq":
        return v[0] is not v[1]
    if k == "empty":
        return v[0] is EMPTY
    if k == "union":
        return v[0].members == v[1].members | v[2].members
    if k == "inter":
        return v[0].members == v[1].members & v[2].members
    if k == "diff":
        return v[0].members == v[1].members - v[2].members
    if k == "sub":
        return v[0].members <= v[1].members
    if k == "nsub":
        return not v[0].members <= v[1].members
    if k == "in":
        return v[0] in v[1]
    if k == "notin":
        return v[0] not in v[1]
    if k == "pow":
        return _is_powerset(v[0], v[1])
    if k == "enum":
        return v[0].members == frozenset(v[1:])
    if k == "finite":
        return True
    if k == "infinite":
        return False
    raise ValueError(f"unknown literal kind {k!r}")


def _is_powerset(x: HFSet, y: HFSet) -> bool:
    # cheap size test first so huge powersets are never built
    if len(y) >= 63 or len(x) != 1 << len(y):
        return False
    return all(e.issubset(y) for e in x)


def satisfies(c: NormalizedConjunction, M: Assignment) -> bool:
    return all(holds(l, M) for l in c.literals)


# ---------------------------------------------------------------- partitions


@dataclass(frozen=True)
class TransitivePartition:
    """A list of pairwise disjoint nonempty blocks.

    ``tags[i]`` is the Venn signature (set of variables) of block ``i`` or
    ``None`` for the outer block; tags are provenance only.
    """

    blocks: tuple[frozenset[HFSet], ...]
    tags: tuple[frozenset[str] | None, ...] = ()

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not self.tags:
            object.__setattr__(self, "tags", (None,) * len(blocks))
        if len(self.tags) != len(blocks):
            raise ValueError("one tag per block is required")
        seen: set[HFSet] = set()
        for b in blocks:
            if not b:
                raise ValueError("blocks must be nonempty")
            if seen & b:
                raise ValueError("blocks must be pairwise disjoint")
            seen |= b

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def domain(self) -> frozenset[HFSet]:
        return frozenset().union(*self.blocks)

    @cached_property
    def place_of(self) -> dict[HFSet, int]:
        return {e: i for i, b in enumerate(self.blocks) for e in b}

    def is_transitive(self) -> bool:
        return is_transitive(self.domain)

    @cached_property
    def im(self) -> dict[str, frozenset[int]]:
        out: dict[str, set[int]] = {}
        for i, tag in enumerate(self.tags):
            for v in tag or ():
                out.setdefault(v, set()).add(i)
        return {v: frozenset(s) for v, s in out.items()}

    def image(self, var: str) -> frozenset[int]:
        return self.im.get(var, frozenset())

    def union_of(self, places: Iterable[int]) -> HFSet:
        return union_all(self.blocks[i] for i in places)

    def describe(self) -> list[list]:
        return [[e.to_json() for e in canonical(b)] for b in self.blocks]


def sort_blocks(blocks: Iterable[frozenset[HFSet]], tags=None) -> TransitivePartition:
    """Partition with blocks ordered by their canonical minimum element."""
    blocks = [frozenset(b) for b in blocks]
    tags = list(tags) if tags is not None else [None] * len(blocks)
    order = sorted(range(len(blocks)), key=lambda i: min(blocks[i]))
    return TransitivePartition(tuple(blocks[i] for i in order), tuple(tags[i] for i in order))


def venn_partition(M: Assignment) -> TransitivePartition:
    """Coarsest partition of the union of the images; ``.im`` maps each var to its block indices."""
    signature: dict[HFSet, set[str]] = {}
    for v, s in M.items():
        for e in s:
            signature.setdefault(e, set()).add(v)
    groups: dict[frozenset[str], set[HFSet]] = {}
    for e, sig in signature.items():
        groups.setdefault(frozenset(sig), set()).add(e)
    sigs = list(groups)
    return sort_blocks((groups[s] for s in sigs), sigs)


def outer_region(p: TransitivePartition, M: Assignment) -> frozenset[HFSet]:
    images = union_all(M.values())
    return trcl(images).members - p.domain


def add_outer(p: TransitivePartition, M: Assignment) -> TransitivePartition:
    extra = outer_region(p, M)
    if not extra:
        return p
    return sort_blocks(list(p.blocks) + [extra], list(p.tags) + [None])


def model_partition(M: Assignment) -> TransitivePartition:
    """Venn partition of ``M`` completed with its outer block."""
    return add_outer(venn_partition(M), M)


def model_from_partition(
    p: TransitivePartition, im: Mapping[str, Iterable[int]]
) -> dict[str, HFSet]:
    return {v: p.union_of(places) for v, places in im.items()}


def model_to_json(M: Assignment, synthetic: Iterable[str] = (), verbose: bool = False) -> dict:
    hidden = set(synthetic)
    return {v: s.to_json() for v, s in M.items() if verbose or v not in hidden}
