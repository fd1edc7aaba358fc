"""Pumping paths and chains, the finite pump, and the imitation validators.

A pumping path is a green cycle ``C_0, q_0, ..., C_n, q_n, C_0`` on the
board followed by a contiguous tail ``q_{n+1}, C_{n+2}, ..., q_{n+m+1}``.
A chain cuts the tail into segments and attaches one stage index to
each segment.  ``pump`` replays a process while driving ``k`` extra
elements around the cycle and down the tail; the result is re-checked
against the original by ``check_imitation_segment`` before it is
returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .board import ColoredBoard, fmt_node, induced_targets, node_of, places_in
from .errors import ChainViolation, ImitationViolation, PumpError, SimulationViolation, Violation
from .hfset import HFSet, canonical, in_pow_star, pow_star, pow_star_size, union_all
from .process import (
    FormativeProcess, Step, find_closure, is_closed, local_trashes, unused_elements, validate,
)
from .semantics import TransitivePartition

CANDIDATE_LIMIT = 20000


# ------------------------------------------------------------------ paths


@dataclass(frozen=True)
class PumpingPath:
    """``cycle_nodes[i]`` is C_i and ``cycle_places[i]`` is q_i, with
    q_i in T(C_i) and q_i in C_{i+1} (indices mod n+1).  ``tail_nodes[j]``
    sits between ``tail_places[j]`` and ``tail_places[j+1]``."""

    cycle_nodes: tuple[int, ...]
    cycle_places: tuple[int, ...]
    tail_places: tuple[int, ...]
    tail_nodes: tuple[int, ...] = ()

    @property
    def target(self) -> int:
        return self.tail_places[-1]

    def places(self) -> frozenset[int]:
        return frozenset(self.cycle_places) | frozenset(self.tail_places)

    def cycle_vertices(self) -> list:
        out: list = []
        for C, q in zip(self.cycle_nodes, self.cycle_places):
            out += [C, q]
        return out + [self.cycle_nodes[0]]

    def tail_vertices(self) -> list:
        out: list = [self.tail_places[0]]
        for D, t in zip(self.tail_nodes, self.tail_places[1:]):
            out += [D, t]
        return out

    def describe(self) -> str:
        cyc = ", ".join(fmt_node(v) if i % 2 == 0 else f"p{v}" for i, v in enumerate(self.cycle_vertices()))
        tail = ", ".join(f"p{v}" if i % 2 == 0 else fmt_node(v) for i, v in enumerate(self.tail_vertices()))
        return f"cycle [{cyc}] tail [{tail}]"


def path_violations(g: ColoredBoard, path: PumpingPath) -> list[str]:
    n_nodes = 1 << g.n_places
    Cs, qs = path.cycle_nodes, path.cycle_places
    Ds, ts = path.tail_nodes, path.tail_places
    problems = []
    if not Cs or len(Cs) != len(qs):
        return ["cycle must alternate nodes and places"]
    if not ts or len(Ds) != len(ts) - 1:
        return ["tail must alternate places and nodes and end with a place"]
    for v in Cs + Ds:
        if not 0 <= v < n_nodes:
            return [f"node {v} is outside the board"]
    for v in qs + ts:
        if not 0 <= v < g.n_places:
            return [f"place {v} is outside the board"]
    red = [q for q in qs + ts if g.is_red(q)]
    if red:
        problems.append(f"place p{red[0]} is red")
    size = len(Cs)
    for i in range(size):
        C, q, nxt = Cs[i], qs[i], Cs[(i + 1) % size]
        if not g.T[C] >> q & 1:
            problems.append(f"p{q} is not a target of {fmt_node(C)}")
        if not nxt >> q & 1:
            problems.append(f"p{q} does not belong to {fmt_node(nxt)}")
    if len(set(qs)) != len(qs) or len(set(Cs)) != len(Cs):
        problems.append("cycle is not simple")
    if not g.T[Cs[0]] >> ts[0] & 1:
        problems.append(f"tail start p{ts[0]} is not a target of {fmt_node(Cs[0])}")
    for j, D in enumerate(Ds):
        if not D >> ts[j] & 1:
            problems.append(f"p{ts[j]} does not belong to {fmt_node(D)}")
        if not g.T[D] >> ts[j + 1] & 1:
            problems.append(f"p{ts[j + 1]} is not a target of {fmt_node(D)}")
    if len(set(ts)) != len(ts) or len(set(Ds)) != len(Ds):
        problems.append("tail is not simple")
    # contiguity of the tail to q_0, C_1, ..., q_n, C_{n+1}
    shared = set(qs) & set(ts)
    if not shared <= ({qs[0]} & {ts[0]}):
        problems.append("tail shares a place with the cycle other than q_0 = t_0")
    later = set(Cs[1:]) | {Cs[0]}
    first_c = Cs[1 % size]
    first_d = Ds[0] if Ds else None
    if not (later & set(Ds)) <= ({first_c} & {first_d}):
        problems.append("tail shares a node with the cycle other than C_1 = D_1")
    if first_d is not None and first_c == first_d and qs[0] != ts[0]:
        problems.append("C_1 = D_1 requires q_0 = t_0")
    return problems


# ------------------------------------------------------------------ chains


@dataclass(frozen=True)
class PumpingChain:
    path: PumpingPath
    ends: tuple[int, ...]
    m: tuple[int, ...]
    q0: int
    sigma: int

    @property
    def n_segments(self) -> int:
        return len(self.ends)

    def segment_places(self, i: int) -> frozenset[int]:
        """PLACES(D_i); segment 0 includes the cycle."""
        ts = self.path.tail_places
        if i == 0:
            return frozenset(self.path.cycle_places) | frozenset(ts[: self.ends[0] + 1])
        return frozenset(ts[self.ends[i - 1] + 1: self.ends[i] + 1])

    def segment_nodes(self, i: int) -> tuple[int, ...]:
        Ds = self.path.tail_nodes
        if i == 0:
            return tuple(self.path.cycle_nodes) + tuple(Ds[: self.ends[0]])
        return tuple(Ds[self.ends[i - 1]: self.ends[i]])

    def tail_segment(self, i: int) -> list[tuple[int, int]]:
        """(node, place reached) pairs walked by segment ``i`` of the tail."""
        ts, Ds = self.path.tail_places, self.path.tail_nodes
        lo = 0 if i == 0 else self.ends[i - 1]
        return [(Ds[j], ts[j + 1]) for j in range(lo, self.ends[i])]

    def to_json(self) -> dict:
        def v(x, is_node):
            return places_in(x) if is_node else x

        return {
            "cycle": [v(x, i % 2 == 0) for i, x in enumerate(self.path.cycle_vertices())],
            "tail": [v(x, i % 2 == 1) for i, x in enumerate(self.path.tail_vertices())],
            "segments": list(self.ends),
            "m_vec": list(self.m),
            "q0": self.q0,
            "sigma": self.sigma,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PumpingChain":
        cyc = data["cycle"]
        tail = data["tail"]
        if len(cyc) < 3 or len(cyc) % 2 == 0 or not tail or len(tail) % 2 == 0:
            raise ValueError("malformed pumping path")
        nodes = [node_of(int(p) for p in x) for x in cyc[0:-1:2]]
        places = [int(x) for x in cyc[1::2]]
        if node_of(int(p) for p in cyc[-1]) != nodes[0]:
            raise ValueError("cycle must end where it starts")
        path = PumpingPath(
            tuple(nodes), tuple(places),
            tuple(int(x) for x in tail[0::2]),
            tuple(node_of(int(p) for p in x) for x in tail[1::2]),
        )
        return cls(
            path, tuple(int(x) for x in data["segments"]), tuple(int(x) for x in data["m_vec"]),
            int(data["q0"]), int(data["sigma"]),
        )


def _pn(n_places: int, places: Iterable[int]) -> list[int]:
    mask = node_of(places)
    return [B for B in range(1 << n_places) if B & mask]


def _chain_i(p: FormativeProcess, q0: int, m0: int) -> bool:
    return bool(unused_elements(p, q0, m0))


def _chain_ii(p: FormativeProcess, places: Iterable[int], m: int) -> bool:
    ge = p.grand_events
    return min((ge[B] for B in _pn(p.n_places, places)), default=p.length) >= m


def _chain_iii(p: FormativeProcess, nodes: Iterable[int], m: int) -> bool:
    return all(all(p.block(q, m) for q in places_in(B)) for B in nodes)


def check_chain(p: FormativeProcess, chain: PumpingChain, closure: Iterable[int]) -> None:
    """Raise ``ChainViolation`` naming the first failed condition."""
    g = p.board
    problems = path_violations(g, chain.path)
    if problems:
        raise ChainViolation("path", problems[0])
    if chain.sigma != chain.path.target:
        raise ChainViolation("path", f"sigma p{chain.sigma} is not the end of the tail")
    ends, m = chain.ends, chain.m
    last = len(chain.path.tail_places) - 1
    if not ends or any(a >= b for a, b in zip(ends, ends[1:])) or ends[0] < 0 or ends[-1] != last:
        raise ChainViolation("segments", f"segment ends {list(ends)} do not partition the tail")
    if len(m) != len(ends):
        raise ChainViolation("m-sequence", "one stage index per segment is required")
    if any(x < 0 for x in m):
        raise ChainViolation("m-sequence", f"stage indices {list(m)} must be non-negative")
    if len(m) > 1 and m[0] > m[1]:
        raise ChainViolation("m-sequence", "m_0 > m_1")
    if any(a >= b for a, b in zip(m[1:], m[2:])):
        raise ChainViolation("m-sequence", "m_1 < m_2 < ... must be strictly increasing")
    if chain.q0 not in chain.path.cycle_places:
        raise ChainViolation("chain.i", f"q0 = p{chain.q0} is not on the cycle")
    if not _chain_i(p, chain.q0, m[0]):
        raise ChainViolation("chain.i", f"p{chain.q0} holds no unused element at stage {m[0]}")
    for i in range(len(ends)):
        if not _chain_ii(p, chain.segment_places(i), m[i]):
            raise ChainViolation("chain.ii", f"a node meeting segment {i} has its grand event before stage {m[i]}")
    for i in range(len(ends)):
        for B in chain.segment_nodes(i):
            if not _chain_iii(p, [B], m[i]):
                raise ChainViolation("chain.iii", f"Pow* of {fmt_node(B)} is empty at stage {m[i]}")
    if m[-1] >= p.length:
        raise ChainViolation("m-sequence", f"m_N = {m[-1]} is not below the process length {p.length}")
    W = frozenset(closure)
    if not chain.path.places() <= W:
        raise ChainViolation("closed", "closure misses a place of the pumping path")
    if not is_closed(p, W):
        raise ChainViolation("closed", "closure is not closed")


def _bipartite(g: ColoredBoard) -> nx.DiGraph:
    G = nx.DiGraph()
    green = g.green_places()
    for C in range(1, 1 << g.n_places):
        targets = [t for t in places_in(g.T[C]) if not g.is_red(t)]
        if not targets:
            continue
        for t in targets:
            G.add_edge(("n", C), ("p", t))
        for q in places_in(C):
            if q in green:
                G.add_edge(("p", q), ("n", C))
    return G


def pumping_cycles(g: ColoredBoard) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every simple green cycle, once per choice of starting node C_0."""
    G = _bipartite(g)
    found = []
    for cyc in nx.simple_cycles(G):
        k = next(i for i, v in enumerate(cyc) if v[0] == "n")
        cyc = cyc[k:] + cyc[:k]
        nodes = tuple(v[1] for v in cyc[0::2])
        places = tuple(v[1] for v in cyc[1::2])
        for r in range(len(nodes)):
            found.append((nodes[r:] + nodes[:r], places[r:] + places[:r]))
    found.sort(key=lambda c: (len(c[0]), c))
    yield from found


def pumping_tails(g: ColoredBoard, nodes: tuple[int, ...], places: tuple[int, ...], target: int) -> Iterator[PumpingPath]:
    """Contiguous tails from C_0 to ``target``, shortest first."""
    found = []
    C0 = nodes[0]
    if g.is_red(target):
        return

    def extend(ts: list[int], Ds: list[int]):
        path = PumpingPath(nodes, places, tuple(ts), tuple(Ds))
        if ts[-1] == target and not path_violations(g, path):
            found.append(path)
        if len(ts) > g.n_places:
            return
        last = ts[-1]
        for D in range(1, 1 << g.n_places):
            if not D >> last & 1 or D in Ds:
                continue
            for t in places_in(g.T[D] & ~g.F):
                if t in ts:
                    continue
                extend(ts + [t], Ds + [D])

    for t0 in places_in(g.T[C0] & ~g.F):
        extend([t0], [])
    found.sort(key=lambda P: (len(P.tail_places), P.tail_places, P.tail_nodes))
    yield from found


def _segmentations(length: int) -> Iterator[tuple[int, ...]]:
    """Segment end indices over tail places 0..length-1, fewest segments first."""
    last = length - 1
    for cuts in range(0, last + 1):
        for combo in itertools.combinations(range(last), cuts):
            yield tuple(combo) + (last,)


def _stage_vector(p: FormativeProcess, chain_shape: PumpingChain) -> tuple[int, ...] | None:
    xi = p.length
    shape = chain_shape
    for m0 in range(xi):
        if not (_chain_i(p, shape.q0, m0) and _chain_ii(p, shape.segment_places(0), m0)
                and _chain_iii(p, shape.segment_nodes(0), m0)):
            continue
        ms = [m0]
        ok = True
        for i in range(1, shape.n_segments):
            lo = ms[-1] if i == 1 else ms[-1] + 1
            pick = None
            for mi in range(lo, xi):
                if _chain_ii(p, shape.segment_places(i), mi) and _chain_iii(p, shape.segment_nodes(i), mi):
                    pick = mi
                    break
            if pick is None:
                ok = False
                break
            ms.append(pick)
        if ok:
            return tuple(ms)
    return None


def find_pumping_chains(
    p: FormativeProcess, target: int, limit: int | None = None
) -> list[tuple[PumpingChain, frozenset[int]]]:
    """Closure-equipped pumping chains ending at ``target`` (exhaustive, deterministic order)."""
    g = p.board
    out: list[tuple[PumpingChain, frozenset[int]]] = []
    if not 0 <= target < g.n_places or g.is_red(target):
        return out
    for nodes, places in pumping_cycles(g):
        for path in pumping_tails(g, nodes, places, target):
            for q0 in sorted(set(places)):
                for ends in _segmentations(len(path.tail_places)):
                    shape = PumpingChain(path, ends, (0,) * len(ends), q0, target)
                    m = _stage_vector(p, shape)
                    if m is None:
                        continue
                    closure = find_closure(p, path.places())
                    if closure is None:
                        continue
                    chain = PumpingChain(path, ends, m, q0, target)
                    out.append((chain, closure))
                    if limit is not None and len(out) >= limit:
                        return out
                    break
    return out


# ------------------------------------------------------------------ pump


class _Builder:
    """Accumulates steps of the pumped process."""

    def __init__(self, n: int, reserved: frozenset[HFSet]):
        self.n = n
        self.steps: list[Step] = []
        self.surplus: list[dict[int, frozenset[HFSet]]] = []
        self.blocks: list[set[HFSet]] = [set() for _ in range(n)]
        self.placed: dict[HFSet, int] = {}
        self.surplus_set: set[HFSet] = set()
        self.reserved = reserved

    @property
    def stage(self) -> int:
        return len(self.steps)

    def add(self, move: int, minus: dict[int, set[HFSet]], surplus: dict[int, set[HFSet]]) -> None:
        delta: dict[int, set[HFSet]] = {}
        for part in (minus, surplus):
            for q, es in part.items():
                for e in es:
                    if e in self.placed or any(e in d for d in delta.values()):
                        raise PumpError("fresh", f"{e} would be placed twice", self.stage)
                    delta.setdefault(q, set()).add(e)
        if not delta:
            return
        self.steps.append(Step(move, delta))
        self.surplus.append({q: frozenset(es) for q, es in surplus.items() if es})
        for q, es in delta.items():
            for e in es:
                self.placed[e] = q
                self.blocks[q].add(e)
        for es in surplus.values():
            self.surplus_set.update(es)

    def node_blocks(self, C: int) -> list[frozenset[HFSet]]:
        return [frozenset(self.blocks[q]) for q in places_in(C)]

    def fresh(self, C: int, seed: HFSet | None, taken: set[HFSet]) -> Iterator[HFSet]:
        """Fresh members of Pow* of C's current blocks, containing ``seed`` if given, smallest first."""
        blocks = self.node_blocks(C)
        if any(not b for b in blocks):
            return
        pool = canonical(set().union(*blocks) - ({seed} if seed is not None else set()))
        base = (seed,) if seed is not None else ()
        tried = 0
        for size in range(0, len(pool) + 1):
            for combo in itertools.combinations(pool, size):
                tried += 1
                if tried > CANDIDATE_LIMIT:
                    return
                x = HFSet(base + combo)
                if x in self.placed or x in self.reserved or x in taken:
                    continue
                if in_pow_star(x, blocks):
                    yield x

    def create(self, C: int, seeds: Sequence[HFSet | None], taken: set[HFSet]) -> HFSet:
        for s in seeds:
            for x in self.fresh(C, s, taken):
                return x
        raise PumpError("fresh", f"no fresh element left in Pow* of {fmt_node(C)}", self.stage)

    def process(self, board: ColoredBoard) -> FormativeProcess:
        return FormativeProcess(board, tuple(self.steps), tuple(self.surplus))


@dataclass(frozen=True)
class PumpResult:
    process: FormativeProcess
    gamma: tuple[int, ...]
    insertion: tuple[int, ...]
    seed: HFSet


def _segment_windows(p: FormativeProcess, chain: PumpingChain, tau0: int) -> list[int] | None:
    ge = p.grand_events
    taus = [tau0]
    for i in range(1, chain.n_segments):
        taus.append(max(chain.m[i], taus[-1]))
    for i, t in enumerate(taus):
        limit = min((ge[B] for B in _pn(p.n_places, chain.segment_places(i))), default=p.length)
        if t > limit or t < chain.m[i]:
            return None
    return taus


def _run_segment_zero(b: _Builder, chain: PumpingChain, seed: HFSet, k: int) -> list[HFSet]:
    path = chain.path
    Cs, qs = path.cycle_nodes, path.cycle_places
    size = len(Cs)
    start = qs.index(chain.q0)
    t0 = path.tail_places[0]
    tails: list[HFSet] = []
    current = seed
    for _ in range(k):
        for step in range(1, size + 1):
            i = (start + step) % size
            C, q = Cs[i], qs[i]
            taken: set[HFSet] = set()
            made = b.create(C, [current], taken)
            b.add(C, {}, {q: {made}})
            if i == 0:
                if t0 == q:
                    tails.append(made)
                else:
                    # separate step so the new cycle element may serve as a member
                    extra = b.create(C, [current, made, None], taken)
                    b.add(C, {}, {t0: {extra}})
                    tails.append(extra)
            current = made
    for D, t in chain.tail_segment(0):
        tails = _propagate(b, D, t, tails)
    return tails


def _propagate(b: _Builder, D: int, t: int, seeds: list[HFSet]) -> list[HFSet]:
    out = []
    for s in seeds:
        made = b.create(D, [s, None], set())
        b.add(D, {}, {t: {made}})
        out.append(made)
    return out


def _replay(b: _Builder, p: FormativeProcess, beta: int, phi: dict[HFSet, HFSet],
            closure: frozenset[int]) -> None:
    step = p.steps[beta]
    A = step.move
    ge = p.grand_events
    final_union = p.node_union(A)
    has_surplus = any(e in b.surplus_set for q in places_in(A) for e in b.blocks[q])
    minus: dict[int, set[HFSet]] = {}
    for e, q in step.new_elements():
        if e is final_union and has_surplus:
            img = union_all(b.blocks[r] for r in places_in(A))
        else:
            img = HFSet(phi[m] for m in e)
        phi[e] = img
        minus.setdefault(q, set()).add(img)
    surplus: dict[int, set[HFSet]] = {}
    if A in p.board.Q and ge[A] == beta and has_surplus:
        blocks = b.node_blocks(A)
        new = {x for es in minus.values() for x in es}
        rest = [x for x in canonical(pow_star(blocks)) if x not in b.placed and x not in new]
        if rest:
            trash = sorted(local_trashes(p, A) & closure)
            if not trash:
                raise PumpError("closed", f"{fmt_node(A)} has no local trash inside the closure", beta)
            surplus[trash[0]] = set(rest)
    b.add(A, minus, surplus)


def _build(p: FormativeProcess, chain: PumpingChain, k: int, closure: frozenset[int],
           taus: list[int], seed: HFSet) -> PumpResult:
    b = _Builder(p.n_places, p.domain())
    phi: dict[HFSet, HFSet] = {}
    gamma = []
    tails: list[HFSet] = []
    for beta in range(p.length + 1):
        for i, t in enumerate(taus):
            if t != beta:
                continue
            if i == 0:
                tails = _run_segment_zero(b, chain, seed, k)
            else:
                for D, place in chain.tail_segment(i):
                    tails = _propagate(b, D, place, tails)
        gamma.append(b.stage)
        if beta < p.length:
            _replay(b, p, beta, phi, closure)
    return PumpResult(b.process(p.board), tuple(gamma), tuple(taus), seed)


def _postcheck(p: FormativeProcess, r: PumpResult, chain: PumpingChain, k: int,
               closure: frozenset[int]) -> None:
    hat = r.process
    try:
        validate(hat)
    except Violation as exc:
        raise PumpError("validate", str(exc)) from exc
    for q in range(p.n_places):
        if len(hat.minus_block(q)) != len(p.block(q)):
            raise PumpError("minus", f"Minus part of p{q} lost its original size")
        if p.board.is_red(q) and hat.surplus_block(q):
            raise PumpError("red", f"red place p{q} received surplus")
    if len(hat.block(chain.sigma)) < len(p.block(chain.sigma)) + k:
        raise PumpError("growth", f"p{chain.sigma} did not grow by {k}")
    if not hat.surplus_places() <= closure:
        raise PumpError("closure", "surplus escaped the closure")
    try:
        check_imitation_segment(p, hat, r.gamma, closure)
    except ImitationViolation as exc:
        raise PumpError("imitation", str(exc)) from exc


def pump_with_embedding(
    p: FormativeProcess, chain: PumpingChain, k: int, closure: Iterable[int] | None = None
) -> PumpResult:
    """Pump ``k`` times and return the new process with its stage embedding.

    Insertion stages and seeds are tried in increasing order; the first
    construction that passes every postcondition wins.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    W = frozenset(closure) if closure is not None else find_closure(p, chain.path.places())
    if W is None:
        raise PumpError("closed", "pumping path has no closure")
    try:
        check_chain(p, chain, W)
    except ChainViolation as exc:
        raise PumpError(exc.label, exc.detail) from exc
    last: PumpError | None = None
    for tau0 in range(chain.m[0], p.length + 1):
        taus = _segment_windows(p, chain, tau0)
        if taus is None:
            continue
        for seed in unused_elements(p, chain.q0, tau0):
            try:
                r = _build(p, chain, k, W, taus, seed)
                _postcheck(p, r, chain, k, W)
                return r
            except PumpError as exc:
                last = exc
    raise last or PumpError("window", "no insertion stage satisfies the chain windows")


def pump(p: FormativeProcess, chain: PumpingChain, k: int, closure: Iterable[int] | None = None) -> FormativeProcess:
    return pump_with_embedding(p, chain, k, closure).process


def natural_gamma(p: FormativeProcess) -> tuple[int, ...]:
    return tuple(range(p.length + 1))


# ------------------------------------------------------------------ simulation


def _union(partition: Sequence[frozenset[HFSet]], places: Iterable[int]) -> HFSet:
    return union_all(partition[q] for q in places)


def _place_map(partition: Sequence[frozenset[HFSet]]) -> dict[HFSet, int]:
    return {e: i for i, b in enumerate(partition) for e in b}


@dataclass
class WeakContext:
    """Data needed by the weak imitation clauses."""

    process: FormativeProcess
    stage: int
    hat: FormativeProcess
    hat_stage: int
    closure: frozenset[int] = field(default_factory=frozenset)


SIM_MODES = ("conditions-1-4", "simulates-upwards", "imitates-upwards", "weakly-imitates")


def check_simulation(
    sigma: TransitivePartition | Sequence[frozenset[HFSet]],
    sigma_hat: TransitivePartition | Sequence[frozenset[HFSet]],
    beta: Sequence[int],
    mode: str,
    *,
    Q: Iterable[int] = (),
    red: Iterable[int] = (),
    L: int = 0,
    context: WeakContext | None = None,
) -> None:
    """Check one of the simulation relations between two partitions.

    ``beta[i]`` is the index in ``sigma_hat`` of the image of block ``i``.
    Raises ``SimulationViolation`` naming the failed clause.
    """
    if mode not in SIM_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    S = list(sigma.blocks if isinstance(sigma, TransitivePartition) else sigma)
    H = list(sigma_hat.blocks if isinstance(sigma_hat, TransitivePartition) else sigma_hat)
    n = len(S)
    if len(H) != n or sorted(beta) != list(range(n)):
        raise SimulationViolation("bijection", "beta must be a bijection between the partitions")
    Q = frozenset(Q)
    red = frozenset(red)

    def bmap(X: int) -> int:
        return node_of(beta[i] for i in places_in(X))

    if mode == "weakly-imitates":
        if context is None:
            raise ValueError("weakly-imitates needs a WeakContext")
        _check_weak(S, H, beta, bmap, Q, red, context)
        return

    for s in sorted(red):
        if len(H[beta[s]]) != len(S[s]):
            label = "(4')" if mode == "imitates-upwards" else "red"
            raise SimulationViolation(label, f"|p{s}| = {len(S[s])} but its image has {len(H[beta[s]])}")

    pos, pos_hat = _place_map(S), _place_map(H)
    nodes = range(1 << n)

    def membership(X: int) -> tuple[int | None, int | None]:
        return pos.get(_union(S, places_in(X))), pos_hat.get(_union(H, places_in(bmap(X))))

    if mode == "imitates-upwards":
        T, That = induced_targets(TransitivePartition(tuple(S))), induced_targets(TransitivePartition(tuple(H)))
        for X in nodes:
            if bmap(T[X]) != That[bmap(X)]:
                raise SimulationViolation("(1)", f"targets of {fmt_node(X)} differ under beta")
        for X in nodes:
            a, b = membership(X)
            if (a is None) != (b is None) or (a is not None and beta[a] != b):
                raise SimulationViolation("(2)", f"union of {fmt_node(X)} is placed differently")
        dom_hat = frozenset(pos_hat)
        for X in sorted(Q):
            blocks = [H[q] for q in places_in(bmap(X))]
            count = sum(1 for e in dom_hat if in_pow_star(e, blocks))
            if count != pow_star_size(blocks):
                raise SimulationViolation("(3)", f"Pow* of the image of {fmt_node(X)} is not in the domain")
        return

    for X in nodes:
        a, b = membership(X)
        if (a is None) != (b is None) or (a is not None and beta[a] != b):
            raise SimulationViolation("in-simulation", f"union of {fmt_node(X)} is placed differently")

    ys = sorted(Q) if mode == "simulates-upwards" else list(nodes)
    for Y in ys:
        uy = _union(S, places_in(Y))
        if len(uy) > 16:
            continue
        want = frozenset(HFSet(c) for r in range(len(uy) + 1) for c in itertools.combinations(uy.elements, r))
        if not want <= pos.keys():
            continue
        X = node_of(pos[e] for e in want)
        if _union(S, places_in(X)).members != want:
            continue
        ux_hat = _union(H, places_in(bmap(X)))
        uy_hat = _union(H, places_in(bmap(Y)))
        if len(uy_hat) >= 63 or len(ux_hat) != 1 << len(uy_hat) or not all(e.issubset(uy_hat) for e in ux_hat):
            raise SimulationViolation("P-simulation", f"{fmt_node(X)} is the powerset of {fmt_node(Y)} only on one side")

    if mode == "conditions-1-4" and L > 0:
        union_of_node = {_union(S, places_in(Y)): Y for Y in nodes}
        for X in nodes:
            ux = _union(S, places_in(X))
            if not 1 <= len(ux) <= L:
                continue
            Ys = [union_of_node.get(e) for e in ux]
            if any(Y is None for Y in Ys):
                continue
            want = {_union(H, places_in(bmap(Y))) for Y in Ys}
            if _union(H, places_in(bmap(X))).members != frozenset(want):
                raise SimulationViolation("L-simulation", f"{fmt_node(X)} is an enumeration only on one side")


def _check_weak(S, H, beta, bmap, Q, red, ctx: WeakContext) -> None:
    p, k, hat, s, W = ctx.process, ctx.stage, ctx.hat, ctx.hat_stage, ctx.closure
    n = len(S)
    ge = p.grand_events
    minus = [hat.minus_block(beta[q], s) for q in range(n)]
    sur_places = hat.surplus_places(s)
    dom, dom_hat = p.domain(k), hat.domain(s)
    for q in range(n):
        if len(S[q]) != len(minus[q]):
            raise SimulationViolation("(i)", f"|p{q}| differs from the Minus part of its image")
    for q in red:
        if beta[q] in sur_places:
            raise SimulationViolation("(vii)", f"red place p{q} carries surplus")
    if not {q for q in range(n) if beta[q] in sur_places} <= W:
        raise SimulationViolation("(viii)", "surplus outside the closure")
    for G in range(1 << n):
        Gs = places_in(G)
        u = _union(S, Gs)
        lhs = in_pow_star(u, [S[q] for q in Gs]) and u not in dom
        # grand unions are replayed as the full union of the image blocks
        uh = _union(H, [beta[q] for q in Gs])
        rhs = in_pow_star(uh, [H[beta[q]] for q in Gs]) and uh not in dom_hat
        if lhs != rhs:
            raise SimulationViolation("(a)", f"unplaced grand union of {fmt_node(G)} differs")
    for G in range(1 << n):
        Gs = places_in(G)
        hblocks = [H[beta[q]] for q in Gs]
        uh = _union(H, [beta[q] for q in Gs])
        if ge[G] >= k and any(beta[q] in sur_places for q in Gs):
            if not (in_pow_star(uh, hblocks) and uh not in dom_hat):
                raise SimulationViolation("(b)", f"union of the image of {fmt_node(G)} is already placed")
        if ge[G] < k:
            u = _union(S, Gs)
            for q in range(n):
                if (u in S[q]) != (uh in H[beta[q]]):
                    raise SimulationViolation("(c)", f"union of {fmt_node(G)} is placed differently")
            if G in Q:
                count = sum(1 for e in dom_hat if in_pow_star(e, hblocks))
                if count != pow_star_size(hblocks):
                    raise SimulationViolation("(c)", f"Pow* of the image of {fmt_node(G)} is not in the domain")
    for G in range(1 << n):
        Gs = places_in(G)
        if any(beta[q] in sur_places for q in Gs):
            continue
        ob = [S[q] for q in Gs]
        hb = [minus[q] for q in Gs]
        for q in range(n):
            a = sum(1 for e in S[q] if in_pow_star(e, ob))
            b = sum(1 for e in H[beta[q]] if in_pow_star(e, hb))
            if a != b:
                raise SimulationViolation("(x)", f"Pow* of {fmt_node(G)} meets p{q} differently")


# ------------------------------------------------------------------ imitation


def check_imitation_segment(
    p: FormativeProcess,
    hat: FormativeProcess,
    gamma: Sequence[int],
    closure: Iterable[int],
) -> None:
    """Check that ``hat`` imitates ``p`` along the stage embedding ``gamma``.

    ``gamma[b]`` is the stage of ``hat`` matched with stage ``b`` of ``p``;
    step ``b`` of ``p`` is replayed by step ``gamma[b]`` of ``hat`` and any
    step strictly between two replays must be all surplus.  Places are
    matched by index.  Stages are scanned in order and, within a stage,
    clauses are tried in the order interpolated, (i), ..., (x).
    """
    W = frozenset(closure)
    n, xi = p.n_places, p.length
    if hat.n_places != n:
        raise ImitationViolation("gamma", "processes have different numbers of places")
    if len(gamma) != xi + 1 or any(a >= b for a, b in zip(gamma, gamma[1:])) or gamma[0] < 0 or gamma[-1] > hat.length:
        raise ImitationViolation("gamma", "gamma must be an increasing map into the stages of the imitating process")
    g = p.board
    ge = p.grand_events
    nodes = range(1 << n)
    surplus = hat.surplus_elements
    red = [q for q in range(n) if g.is_red(q)]

    def minus_blocks(stage: int) -> list[frozenset[HFSet]]:
        return [b - surplus for b in hat.blocks(stage)]

    for beta in range(xi + 1):
        s = gamma[beta]
        lo = gamma[beta - 1] + 1 if beta else 0
        for j in range(lo, s):
            if any(hat.delta_minus(j, q) for q in range(n)):
                raise ImitationViolation("interpolated", f"inserted step {j} books a minus element", beta)
        orig = p.blocks(beta)
        mb = minus_blocks(s)
        for q in range(n):
            if len(orig[q]) != len(mb[q]):
                raise ImitationViolation("(i)", f"|p{q}| = {len(orig[q])} but Minus has {len(mb[q])}", beta)
        if beta < xi:
            step = p.steps[beta]
            for q in range(n):
                a = len(step.delta.get(q, ()))
                b = len(hat.delta_minus(s, q))
                if a != b:
                    raise ImitationViolation("(ii)", f"p{q} gains {a} elements but its image gains {b} minus", beta)
            A = step.move
            for q in range(n):
                if hat.delta_surplus(s, q):
                    if ge[A] != beta or q not in local_trashes(p, A) or q not in W:
                        raise ImitationViolation("(iii)", f"surplus at p{q} outside a local trash of the grand move", beta)
            for G in sorted(g.Q):
                if ge[G] != beta:
                    continue
                blocks = [hat.block(q, s) for q in places_in(G)]
                dom_next = hat.domain(gamma[beta + 1])
                count = sum(1 for e in dom_next if in_pow_star(e, blocks))
                if count != pow_star_size(blocks):
                    raise ImitationViolation("(iv)", f"Pow* of {fmt_node(G)} is not placed after its grand event", beta)
            hat_new = {e: q for q in range(n) for e in hat.steps[s].delta.get(q, ())}
            orig_new = {e: q for q in range(n) for e in step.delta.get(q, ())}
            hb = hat.blocks(s)
            # a node with an empty block shares its union with a smaller node
            full = [G for G in nodes if all(orig[q] for q in places_in(G))]
            for G in full:
                Gs = places_in(G)
                a = orig_new.get(_union(orig, Gs))
                if ge[G] != beta:
                    b = hat_new.get(_union(mb, Gs))
                    if a != b:
                        raise ImitationViolation("(v)", f"union of {fmt_node(G)} is created differently", beta)
            for G in full:
                Gs = places_in(G)
                if ge[G] == beta:
                    a = orig_new.get(_union(orig, Gs))
                    b = hat_new.get(_union(hb, Gs))
                    if a != b:
                        raise ImitationViolation("(vi)", f"grand union of {fmt_node(G)} is created differently", beta)
        sur_places = hat.surplus_places(s)
        for q in red:
            if q in sur_places:
                raise ImitationViolation("(vii)", f"red place p{q} carries surplus", beta)
        if not sur_places <= W:
            raise ImitationViolation("(viii)", f"surplus at {sorted(sur_places - W)} outside the closure", beta)
        dom, dom_hat = p.domain(beta), hat.domain(s)
        clean = [G for G in nodes if not node_of(sur_places) & G]
        for G in clean:
            Gs = places_in(G)
            ob, hbm = [orig[q] for q in Gs], [mb[q] for q in Gs]
            a = pow_star_size(ob) - sum(1 for e in dom if in_pow_star(e, ob))
            b = pow_star_size(hbm) - sum(1 for e in dom_hat if in_pow_star(e, hbm))
            if a != b:
                raise ImitationViolation("(ix)", f"unplaced Pow* of {fmt_node(G)}: {a} vs {b}", beta)
        if beta >= 1:
            prev, prev_m = p.blocks(beta - 1), minus_blocks(gamma[beta - 1])
            hat_now = hat.blocks(s)
            for G in clean:
                Gs = places_in(G)
                ob, hbm = [prev[q] for q in Gs], [prev_m[q] for q in Gs]
                for q in range(n):
                    a = sum(1 for e in orig[q] if in_pow_star(e, ob))
                    b = sum(1 for e in hat_now[q] if in_pow_star(e, hbm))
                    if a != b:
                        raise ImitationViolation("(x)", f"Pow* of {fmt_node(G)} meets p{q}: {a} vs {b}", beta)
