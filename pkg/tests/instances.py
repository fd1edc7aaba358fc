"""Hand-built pumping instances shared by the pumping, imitation and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from setsat.board import canonical_board, canonical_partition, node_of
from setsat.hfset import EMPTY, HFSet, hf
from setsat.process import FormativeProcess, extract_trace
from setsat.pumping import find_pumping_chains
from setsat.syntax import conjunction

O = EMPTY
A = hf(O)              # {0}
B = hf(A)              # {{0}}
AB = hf(O, A)          # {0,{0}}
BB = hf(B)             # {{{0}}}


@dataclass(frozen=True)
class Instance:
    name: str
    literals: tuple[str, ...]
    model: dict
    target_var: str
    extra_q: tuple[tuple[int, ...], ...] = ()

    @cached_property
    def conj(self):
        return conjunction(list(self.literals), vars=list(self.model))

    @cached_property
    def sigma(self):
        return canonical_partition(self.model, self.conj)

    @cached_property
    def board(self):
        g = canonical_board(self.model, self.conj)
        if self.extra_q:
            g = g.recolor(g.F, set(g.Q) | {node_of(q) for q in self.extra_q})
        return g

    @cached_property
    def process(self) -> FormativeProcess:
        return extract_trace(self.sigma, self.board.F, self.board.Q, board=self.board)

    @cached_property
    def chain_and_closure(self):
        for place in sorted(self.sigma.image(self.target_var)):
            found = find_pumping_chains(self.process, place, limit=1)
            if found:
                return found[0]
        raise AssertionError(f"{self.name}: no chain")

    @property
    def target(self) -> int:
        return self.chain_and_closure[0].sigma


CORPUS = [
    Instance("infinite-x", ("!finite(x)",), {"x": AB}, "x"),
    Instance("empty-and-infinite", ("x = 0", "!finite(y)"), {"x": O, "y": AB}, "y"),
    Instance("red-singleton", ("x = {y}", "!finite(y)"), {"x": hf(AB), "y": AB}, "y"),
    Instance("subset", ("y sub x", "!finite(x)"), {"x": hf(O, A, B), "y": A}, "x"),
    Instance("member", ("x in y", "!finite(y)"), {"x": O, "y": AB}, "y"),
    Instance("two-cycle", ("x != y", "!finite(x)"), {"x": hf(O, B), "y": hf(A, BB)}, "x"),
    Instance(
        "p-node-tail",
        ("!finite(y)", "x nsub y", "z notin x"),
        {"x": AB, "y": hf(B), "z": hf(hf(B))},
        "y",
        extra_q=((), (1,)),
    ),
    Instance(
        "tail-to-z",
        ("!finite(z)", "x nsub y", "z notin x"),
        {"x": AB, "y": hf(B), "z": hf(hf(B))},
        "z",
    ),
]
