"""Places, nodes and colored boards.

A place is a block index; a node is a set of places encoded as an int
bitmask.  The target table ``T`` is dense over all ``2**n`` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ResourceLimitError
from .hfset import HFSet, pow_star_size
from .semantics import Assignment, TransitivePartition, add_outer, venn_partition
from .syntax import NormalizedConjunction

BOARD_LIMIT = 10


def node(*places: int) -> int:
    mask = 0
    for p in places:
        mask |= 1 << p
    return mask


def node_of(places: Iterable[int]) -> int:
    return node(*places)


def places_in(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask: int) -> Iterable[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def downward_closure(nodes: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for n in nodes:
        if n not in out:
            out.update(submasks(n))
    return frozenset(out)


def fmt_node(mask: int) -> str:
    return "{" + ",".join(f"p{p}" for p in places_in(mask)) + "}"


def fmt_places(mask: int) -> str:
    return fmt_node(mask)


@dataclass(frozen=True)
class ColoredBoard:
    n_places: int
    T: tuple[int, ...]
    F: int = 0
    Q: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.T) != 1 << self.n_places:
            raise ValueError("T must list targets for every node")
        object.__setattr__(self, "Q", frozenset(self.Q))

    @property
    def full(self) -> int:
        return (1 << self.n_places) - 1

    def targets(self, A: int) -> int:
        return self.T[A]

    def is_red(self, q: int) -> bool:
        return bool(self.F >> q & 1)

    def green_places(self) -> list[int]:
        return [q for q in range(self.n_places) if not self.is_red(q)]

    def is_q_closed(self) -> bool:
        return all(d in self.Q for b in self.Q for d in submasks(b))

    def recolor(self, F: int | Iterable[int] = 0, Q: Iterable[int] = ()) -> "ColoredBoard":
        if not isinstance(F, int):
            F = node_of(F)
        return ColoredBoard(self.n_places, self.T, F, frozenset(Q))


def element_node(e: HFSet, place_of: Mapping[HFSet, int]) -> int | None:
    """Node whose Pow* contains ``e``; ``None`` if a member is outside the domain."""
    mask = 0
    for m in e:
        p = place_of.get(m)
        if p is None:
            return None
        mask |= 1 << p
    return mask


def induced_targets(sigma: TransitivePartition, limit: int = BOARD_LIMIT) -> tuple[int, ...]:
    n = len(sigma)
    if n > limit:
        raise ResourceLimitError(f"{n} places exceed the board limit of {limit}")
    T = [0] * (1 << n)
    place_of = sigma.place_of
    for e, q in place_of.items():
        A = element_node(e, place_of)
        if A is not None:
            T[A] |= 1 << q
    return tuple(T)


def induced_board(sigma: TransitivePartition, limit: int = BOARD_LIMIT) -> ColoredBoard:
    return ColoredBoard(len(sigma), induced_targets(sigma, limit))


def canonical_coloring(sigma: TransitivePartition, c: NormalizedConjunction) -> tuple[int, frozenset[int]]:
    red = 0
    seeds = []
    for lit in c.literals:
        if lit.kind == "finite" or lit.kind == "enum":
            red |= node_of(sigma.image(lit.args[0]))
        if lit.kind == "pow":
            seeds.append(node_of(sigma.image(lit.args[0])))
    return red, downward_closure(seeds)


def canonical_partition(M: Assignment, c: NormalizedConjunction) -> TransitivePartition:
    return add_outer(venn_partition({v: M[v] for v in c.vars}), {v: M[v] for v in c.vars})


def canonical_board(M: Assignment, c: NormalizedConjunction, limit: int = BOARD_LIMIT) -> ColoredBoard:
    """Colored board over the Venn partition of ``M`` plus its outer block.

    Red places cover the images of variables constrained by ``finite`` or
    an enumeration; P-nodes are the downward closure of the images of
    variables defined as a powerset.
    """
    sigma = canonical_partition(M, c)
    F, Q = canonical_coloring(sigma, c)
    return ColoredBoard(len(sigma), induced_targets(sigma, limit), F, Q)


def compliance_violations(sigma: TransitivePartition, g: ColoredBoard) -> list[str]:
    if len(sigma) != g.n_places:
        raise ValueError(f"partition has {len(sigma)} blocks but board has {g.n_places} places")
    problems = []
    if not sigma.is_transitive():
        problems.append("domain is not transitive")
    T = induced_targets(sigma, max(BOARD_LIMIT, g.n_places))
    for A, (want, got) in enumerate(zip(g.T, T)):
        if want != got:
            problems.append(f"targets of {fmt_node(A)}: board {fmt_places(want)}, partition {fmt_places(got)}")
    if not g.is_q_closed():
        problems.append("P-nodes are not downward closed")
    counts: dict[int, int] = {}
    place_of = sigma.place_of
    for e in place_of:
        A = element_node(e, place_of)
        if A is not None:
            counts[A] = counts.get(A, 0) + 1
    for B in sorted(g.Q):
        need = pow_star_size(sigma.blocks[p] for p in places_in(B))
        if counts.get(B, 0) != need:
            problems.append(f"Pow* of P-node {fmt_node(B)} is not contained in the domain")
    return problems


def complies(sigma: TransitivePartition, g: ColoredBoard) -> bool:
    return not compliance_violations(sigma, g)


def render_board(sigma: TransitivePartition | None, g: ColoredBoard) -> str:
    lines = ["places:"]
    for q in range(g.n_places):
        color = "red" if g.is_red(q) else "green"
        content = ""
        if sigma is not None:
            content = " " + ", ".join(str(e) for e in sorted(sigma.blocks[q]))
        lines.append(f"  p{q} ({color}):{content}")
    lines.append("targets:")
    for A, t in enumerate(g.T):
        if t:
            lines.append(f"  T({fmt_node(A)}) = {fmt_places(t)}")
    lines.append(f"F = {fmt_places(g.F)}")
    lines.append("Q = {" + ", ".join(fmt_node(b) for b in sorted(g.Q)) + "}")
    lines.append("digraph board {")
    shown = sorted({A for A, t in enumerate(g.T) if t} | set(g.Q))
    for A in shown:
        for q in places_in(g.T[A]):
            lines.append(f'  "{fmt_node(A)}" -> "p{q}";')
    for A in shown:
        for q in places_in(A):
            lines.append(f'  "p{q}" -> "{fmt_node(A)}";')
    lines.append("}")
    return "\n".join(lines)
