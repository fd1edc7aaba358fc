"""Finite formative processes over a colored board.

A process is a sequence of steps.  Each step names a move (a node) and
adds fresh elements to some places; every new element must lie in
Pow* of the move's blocks at that stage.  States are never stored, only
recomputed from the deltas.

An optional Minus/Surplus marking lists, per step, which new elements
are surplus.  Everything not listed is minus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .board import (
    ColoredBoard, compliance_violations, element_node, fmt_node, induced_targets,
    places_in,
)
from .errors import MarkingViolation, ProcessViolation
from .hfset import EMPTY, HFSet, canonical, in_pow_star, union_all
from .semantics import TransitivePartition


@dataclass(frozen=True, eq=False)
class Step:
    move: int
    delta: Mapping[int, frozenset[HFSet]]

    def __post_init__(self):
        clean = {q: frozenset(es) for q, es in sorted(self.delta.items()) if es}
        object.__setattr__(self, "delta", clean)

    def new_elements(self) -> Iterator[tuple[HFSet, int]]:
        for q, es in self.delta.items():
            for e in es:
                yield e, q

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Step) and self.move == other.move and self.delta == other.delta

    def to_json(self) -> dict:
        return {
            "move": places_in(self.move),
            "delta": {str(q): [e.to_json() for e in canonical(es)] for q, es in self.delta.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Step":
        move = 0
        for q in data["move"]:
            move |= 1 << int(q)
        delta = {int(q): frozenset(HFSet.from_json(e) for e in es) for q, es in data["delta"].items()}
        return cls(move, delta)


@dataclass(frozen=True, eq=False)
class FormativeProcess:
    board: ColoredBoard
    steps: tuple[Step, ...]
    surplus: tuple[Mapping[int, frozenset[HFSet]], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.surplus is not None:
            marks = tuple(
                {q: frozenset(es) for q, es in sorted(m.items()) if es} for m in self.surplus
            )
            object.__setattr__(self, "surplus", marks)

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def n_places(self) -> int:
        return self.board.n_places

    # -- element bookkeeping

    @cached_property
    def born(self) -> dict[HFSet, int]:
        """Step index at which each element was added (first occurrence wins)."""
        out: dict[HFSet, int] = {}
        for i, s in enumerate(self.steps):
            for e, _ in s.new_elements():
                out.setdefault(e, i)
        return out

    @cached_property
    def place_of(self) -> dict[HFSet, int]:
        out: dict[HFSet, int] = {}
        for s in self.steps:
            for e, q in s.new_elements():
                out.setdefault(e, q)
        return out

    @cached_property
    def node_of(self) -> dict[HFSet, int | None]:
        return {e: element_node(e, self.place_of) for e in self.place_of}

    @cached_property
    def ready(self) -> dict[HFSet, int]:
        """First stage at which all members of each element are placed."""
        born = self.born
        return {e: 1 + max((born.get(m, self.length) for m in e), default=-1) for e in born}

    @cached_property
    def _stage_cache(self) -> dict[int, tuple[frozenset[HFSet], ...]]:
        return {}

    def blocks(self, stage: int | None = None) -> tuple[frozenset[HFSet], ...]:
        """All blocks at ``stage`` in place order (empty places included)."""
        stage = self.length if stage is None else stage
        cache = self._stage_cache
        if stage not in cache:
            out: list[set[HFSet]] = [set() for _ in range(self.n_places)]
            born = self.born
            for e, q in self.place_of.items():
                if born[e] < stage:
                    out[q].add(e)
            cache[stage] = tuple(frozenset(b) for b in out)
        return cache[stage]

    def block(self, q: int, stage: int | None = None) -> frozenset[HFSet]:
        """``q^(stage)``; the final block when ``stage`` is None."""
        return self.blocks(stage)[q]

    def domain(self, stage: int | None = None) -> frozenset[HFSet]:
        stage = self.length if stage is None else stage
        return frozenset(e for e, b in self.born.items() if b < stage)

    def node_union(self, A: int, stage: int | None = None) -> HFSet:
        return union_all(self.block(q, stage) for q in places_in(A))

    def final_partition(self) -> TransitivePartition:
        return TransitivePartition(tuple(self.blocks()))

    # -- marking

    @property
    def is_marked(self) -> bool:
        return self.surplus is not None

    def delta_surplus(self, i: int, q: int) -> frozenset[HFSet]:
        if self.surplus is None:
            return frozenset()
        return self.surplus[i].get(q, frozenset())

    def delta_minus(self, i: int, q: int) -> frozenset[HFSet]:
        return self.steps[i].delta.get(q, frozenset()) - self.delta_surplus(i, q)

    @cached_property
    def surplus_elements(self) -> frozenset[HFSet]:
        if self.surplus is None:
            return frozenset()
        return frozenset(e for m in self.surplus for es in m.values() for e in es)

    def minus_block(self, q: int, stage: int | None = None) -> frozenset[HFSet]:
        return self.block(q, stage) - self.surplus_elements

    def surplus_block(self, q: int, stage: int | None = None) -> frozenset[HFSet]:
        return self.block(q, stage) & self.surplus_elements

    def surplus_places(self, stage: int | None = None) -> frozenset[int]:
        """Places whose Surplus part is nonempty at ``stage``."""
        stage = self.length if stage is None else stage
        born = self.born
        return frozenset(
            self.place_of[e] for e in self.surplus_elements if born[e] < stage
        )

    def with_marking(self, surplus) -> "FormativeProcess":
        return FormativeProcess(self.board, self.steps, tuple(surplus))

    # -- grand events

    @cached_property
    def grand_events(self) -> tuple[int, ...]:
        """GE for every node, indexed by bitmask."""
        final = self.blocks()
        born = self.born
        xi = self.length
        out = []
        for A in range(1 << self.n_places):
            u = union_all(final[q] for q in places_in(A))
            out.append(born.get(u, xi))
        return tuple(out)

    def emit(self) -> str:
        lines = []
        for i, s in enumerate(self.steps):
            parts = []
            for q, es in s.delta.items():
                elems = ", ".join(str(e) for e in canonical(es))
                tag = ""
                sur = self.delta_surplus(i, q)
                if sur:
                    tag = " surplus: " + ", ".join(str(e) for e in canonical(sur))
                parts.append(f"p{q}: [{elems}]{tag}")
            lines.append(f"{i}: move={fmt_node(s.move)} places+={{{'; '.join(parts)}}}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        out: dict = {"places": self.n_places, "steps": [s.to_json() for s in self.steps]}
        if self.surplus is not None:
            out["surplus"] = [
                {str(q): [e.to_json() for e in canonical(es)] for q, es in m.items()}
                for m in self.surplus
            ]
        return out

    @classmethod
    def from_json(cls, data: dict, board: ColoredBoard) -> "FormativeProcess":
        if int(data.get("places", board.n_places)) != board.n_places:
            raise ValueError("process and board disagree on the number of places")
        steps = tuple(Step.from_json(s) for s in data["steps"])
        surplus = None
        if "surplus" in data:
            surplus = tuple(
                {int(q): frozenset(HFSet.from_json(e) for e in es) for q, es in m.items()}
                for m in data["surplus"]
            )
        return cls(board, steps, surplus)


# ------------------------------------------------------------------ checks


def validate(p: FormativeProcess, check_board: bool = True) -> None:
    """Raise ``ProcessViolation`` for the first broken process invariant."""
    n = p.n_places
    placed: set[HFSet] = set()
    place_of: dict[HFSet, int] = {}
    for i, s in enumerate(p.steps):
        if not 0 <= s.move < 1 << n:
            raise ProcessViolation("move", f"node {s.move} is outside the board", i)
        if not s.delta:
            raise ProcessViolation("nonempty", "step adds no element", i)
        fresh: dict[HFSet, int] = {}
        for e, q in s.new_elements():
            if not 0 <= q < n:
                raise ProcessViolation("place", f"place p{q} is outside the board", i)
            if e in placed or e in fresh:
                raise ProcessViolation("fresh", f"{e} is already placed", i)
            fresh[e] = q
            A = element_node(e, place_of)
            if A is None:
                raise ProcessViolation("pow_star", f"{e} has a member not yet placed", i)
            if A != s.move:
                raise ProcessViolation(
                    "pow_star", f"{e} lies in Pow* of {fmt_node(A)}, not of the move {fmt_node(s.move)}", i
                )
        placed.update(fresh)
        place_of.update(fresh)
    if p.surplus is not None:
        _validate_marking(p)
    if not check_board:
        return
    empty = [q for q in range(n) if not p.block(q)]
    if empty:
        raise ProcessViolation("coverage", f"place p{empty[0]} stays empty")
    problems = compliance_violations(p.final_partition(), p.board)
    if problems:
        raise ProcessViolation("compliance", problems[0])


def _validate_marking(p: FormativeProcess) -> None:
    if len(p.surplus) != p.length:
        raise MarkingViolation("marking", "one surplus map per step is required")
    minus_so_far: set[HFSet] = set()
    for i, s in enumerate(p.steps):
        for q, sur in p.surplus[i].items():
            if not sur <= s.delta.get(q, frozenset()):
                raise MarkingViolation("marking", f"surplus at p{q} is not part of the delta", i)
        grand = p.node_union(s.move, i)
        new_minus = set()
        for q in s.delta:
            for e in p.delta_minus(i, q):
                if e is grand:
                    pass  # the union of the move's blocks may stand in for its original
                elif not all(m in minus_so_far for m in e):
                    raise MarkingViolation(
                        "minus", f"{e} at p{q} has a surplus member but is booked minus", i
                    )
                new_minus.add(e)
        minus_so_far |= new_minus


def mark_minus_surplus(p: FormativeProcess, surplus=None) -> FormativeProcess:
    """Attach a Minus/Surplus classification (default: everything minus) and check it."""
    marks = surplus if surplus is not None else [{} for _ in p.steps]
    out = p.with_marking(marks)
    _validate_marking(out)
    return out


def greedy_violations(p: FormativeProcess) -> list[tuple[int, HFSet]]:
    """Pairs (step, element) where ``element`` was available but skipped."""
    by_move: dict[int, list[int]] = {}
    for i, s in enumerate(p.steps):
        by_move.setdefault(s.move, []).append(i)
    out = []
    for e, b in p.born.items():
        A = p.node_of[e]
        r = p.ready[e]
        for i in by_move.get(A, ()):
            if r <= i < b:
                out.append((i, e))
                break
    return sorted(out)


def is_greedy(p: FormativeProcess) -> bool:
    return not greedy_violations(p)


def extract_trace(
    sigma: TransitivePartition, F: int = 0, Q: Iterable[int] = (), board: ColoredBoard | None = None
) -> FormativeProcess:
    """Greedy process that ends with exactly ``sigma``.

    At every stage the least available element (all members placed) picks
    the move; everything available with the same node is added in that
    step, so each Pow* is exhausted the first time it is touched.
    """
    if not sigma.is_transitive():
        raise ProcessViolation("transitive", "partition domain is not transitive")
    if board is None:
        board = ColoredBoard(len(sigma), induced_targets(sigma, max(10, len(sigma))), F, frozenset(Q))
    place_of = sigma.place_of
    node = {e: element_node(e, place_of) for e in place_of}
    waiting: dict[HFSet, int] = {e: len(e) for e in place_of}
    users: dict[HFSet, list[HFSet]] = {}
    for e in place_of:
        for m in e:
            users.setdefault(m, []).append(e)
    available = {e for e, c in waiting.items() if c == 0}
    steps = []
    while available:
        first = min(available)
        A = node[first]
        batch = [e for e in available if node[e] == A]
        delta: dict[int, set[HFSet]] = {}
        for e in batch:
            delta.setdefault(place_of[e], set()).add(e)
        steps.append(Step(A, delta))
        available.difference_update(batch)
        for e in batch:
            for u in users.get(e, ()):
                waiting[u] -= 1
                if waiting[u] == 0:
                    available.add(u)
    return FormativeProcess(board, tuple(steps))


def grand_event(p: FormativeProcess, A: int) -> int:
    return p.grand_events[A]


def grand_event_min(p: FormativeProcess, nodes: Iterable[int]) -> int:
    return min((p.grand_events[A] for A in nodes), default=p.length)


def least_inf(p: FormativeProcess, place_or_node: int) -> int:
    """Always 0: every block of a finite process is finite."""
    return 0


def local_trashes(p: FormativeProcess, A: int) -> frozenset[int]:
    ge = p.grand_events
    g = p.board
    out = set()
    for t in places_in(g.T[A] & ~g.F):
        bit = 1 << t
        if all(ge[B] > ge[A] for B in range(1 << g.n_places) if B & bit):
            out.add(t)
    return frozenset(out)


def is_closed(p: FormativeProcess, W: Iterable[int]) -> bool:
    W = frozenset(W)
    g = p.board
    if any(g.is_red(q) for q in W):
        return False
    wmask = sum(1 << q for q in W)
    return all(local_trashes(p, B) & W for B in g.Q if B & wmask)


def find_closure(p: FormativeProcess, places: Iterable[int]) -> frozenset[int] | None:
    g = p.board
    W = set(places)
    if any(g.is_red(q) for q in W):
        return None
    changed = True
    while changed:
        changed = False
        wmask = sum(1 << q for q in W)
        for B in sorted(g.Q):
            if not B & wmask:
                continue
            trash = local_trashes(p, B)
            if trash & W:
                continue
            if not trash:
                return None
            W.add(min(trash))
            changed = True
            break
    return frozenset(W)


def unused_elements(p: FormativeProcess, q: int, stage: int) -> list[HFSet]:
    """Elements of ``q^(stage)`` that are not members of anything placed by ``stage``."""
    dom = p.domain(stage)
    members = set()
    for e in dom:
        members.update(e)
    return canonical(e for e in p.block(q, stage) if e not in members)


def pow_star_nonempty(p: FormativeProcess, B: int, stage: int) -> bool:
    return all(p.block(q, stage) for q in places_in(B))
