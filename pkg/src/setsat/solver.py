"""Decision procedures, witness search and verification, and a brute-force oracle."""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .board import ColoredBoard, canonical_board, canonical_partition, compliance_violations
from .errors import ChainViolation, PumpError, ResourceLimitError, Violation, WitnessViolation
from .hfset import HFSet, enumerate_level
from .process import FormativeProcess, Step, extract_trace, is_greedy, validate
from .pumping import PumpingChain, check_chain, find_pumping_chains, pump_with_embedding
from .semantics import Assignment, holds, model_from_partition, model_to_json, satisfies
from .syntax import Formula, Literal, NormalizedConjunction, normalize, strip_infinite, term_of_literal

CHAIN_TRIES = 8


def rank_bound_c(n_vars: int) -> int:
    """Completeness rank bound, read as ceil((25/24) m + 5) * 2**(2**m + m) + 3."""
    if n_vars < 0:
        raise ValueError("n_vars must be non-negative")
    m = n_vars.bit_length()  # == ceil(log2(n+1))
    return math.ceil(Fraction(25, 24) * m + 5) * 2 ** (2 ** m + m) + 3


def formula_hash(c: NormalizedConjunction) -> str:
    text = ";".join(c.vars) + "|" + " & ".join(str(l) for l in c.literals)
    return hashlib.sha256(text.encode()).hexdigest()


# ------------------------------------------------------------------ verdicts


@dataclass(frozen=True)
class Sat:
    model: dict[str, HFSet]
    conjunction: NormalizedConjunction | None = None
    name = "Sat"


@dataclass(frozen=True)
class SatWitness:
    witness: "Witness"
    conjunction: NormalizedConjunction | None = None
    name = "SatWitness"

    @property
    def model(self) -> dict[str, HFSet]:
        return self.witness.model


@dataclass(frozen=True)
class NoModelUpTo:
    rank_bound: int
    skipped: int = 0
    name = "NoModelUpTo"


@dataclass(frozen=True)
class Unsat:
    name = "Unsat"


Verdict = Union[Sat, SatWitness, NoModelUpTo, Unsat]


# ------------------------------------------------------------------ witnesses


@dataclass(frozen=True)
class Witness:
    model: dict[str, HFSet]
    trace: FormativeProcess
    gamma_inf: frozenset[int]
    chains: Mapping[int, tuple[PumpingChain, frozenset[int]]]
    formula_hash: str = ""

    def to_json(self) -> dict:
        return {
            "formula_hash": self.formula_hash,
            "model": {v: s.to_json() for v, s in self.model.items()},
            "trace": self.trace.to_json(),
            "gamma_inf": sorted(self.gamma_inf),
            "chains": [
                {**self.chains[s][0].to_json(), "closure": sorted(self.chains[s][1])}
                for s in sorted(self.chains)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Witness":
        """Parse a witness; the trace gets a blank board that verification replaces."""
        try:
            model = {str(v): HFSet.from_json(s) for v, s in data["model"].items()}
            n = int(data["trace"]["places"])
            if not 0 <= n <= 16:
                raise ValueError("implausible number of places")
            blank = ColoredBoard(n, (0,) * (1 << n))
            trace = FormativeProcess.from_json(data["trace"], blank)
            chains = {}
            for item in data["chains"]:
                ch = PumpingChain.from_json(item)
                chains[ch.sigma] = (ch, frozenset(int(q) for q in item["closure"]))
            gamma = frozenset(int(q) for q in data["gamma_inf"])
            return cls(model, trace, gamma, chains, str(data.get("formula_hash", "")))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed witness: {exc}") from exc


def _pumped_model(hat: FormativeProcess, variables: Iterable[str], sigma_im: Mapping[str, Iterable[int]]) -> dict[str, HFSet]:
    """Read a model off the pumped partition; a variable is the union of its image."""
    return model_from_partition(hat.final_partition(), {v: sigma_im.get(v, ()) for v in variables})


def _check_pumps(c: NormalizedConjunction, p: FormativeProcess, im, chain: PumpingChain,
                 closure: frozenset[int], ks=(1, 2)) -> None:
    base = len(p.block(chain.sigma))
    phi_minus = strip_infinite(c)
    last = base
    for k in ks:
        try:
            r = pump_with_embedding(p, chain, k, closure)
        except PumpError as exc:
            raise WitnessViolation("pump", f"k={k}: {exc}") from exc
        size = len(r.process.block(chain.sigma))
        if size <= last:
            raise WitnessViolation("growth", f"p{chain.sigma} has {size} elements after pumping {k} times")
        last = size
        if not satisfies(phi_minus, _pumped_model(r.process, c.vars, im)):
            raise WitnessViolation("preservation", f"pumped model violates a literal at k={k}")


def verify_witness(c: NormalizedConjunction, w: Witness) -> None:
    """Re-check every witness invariant from scratch; raise ``WitnessViolation``."""
    if w.formula_hash != formula_hash(c):
        raise WitnessViolation("hash", "witness was issued for a different conjunction")
    missing = [v for v in c.vars if v not in w.model]
    if missing:
        raise WitnessViolation("model", f"no value for {missing}")
    if not satisfies(strip_infinite(c), w.model):
        raise WitnessViolation("model", "model does not satisfy the finite part")
    sigma = canonical_partition(w.model, c)
    try:
        g = canonical_board(w.model, c)
    except ResourceLimitError as exc:
        raise WitnessViolation("board", str(exc)) from exc
    problems = compliance_violations(sigma, g)
    if problems:
        raise WitnessViolation("board", problems[0])
    if w.trace.n_places != g.n_places:
        raise WitnessViolation("trace.partition", "trace and model disagree on the number of places")
    p = FormativeProcess(g, w.trace.steps, w.trace.surplus)
    try:
        validate(p)
    except Violation as exc:
        raise WitnessViolation("trace", str(exc)) from exc
    if tuple(p.blocks()) != tuple(sigma.blocks):
        raise WitnessViolation("trace.partition", "trace does not end at the canonical partition of the model")
    if not is_greedy(p):
        raise WitnessViolation("greedy", "trace is not greedy")
    for x in c.infinite_vars():
        if not w.gamma_inf & sigma.image(x):
            raise WitnessViolation("coverage", f"no infinite place covers {x}")
    for s in sorted(w.gamma_inf):
        if not 0 <= s < g.n_places:
            raise WitnessViolation("gamma", f"p{s} is not a place")
        if s not in w.chains:
            raise WitnessViolation("gamma", f"p{s} has no pumping chain")
    for s in sorted(w.gamma_inf):
        chain, closure = w.chains[s]
        if chain.sigma != s:
            raise WitnessViolation("path", f"chain listed for p{s} ends at p{chain.sigma}")
        try:
            check_chain(p, chain, closure)
        except ChainViolation as exc:
            raise WitnessViolation(exc.label, exc.detail) from exc
        _check_pumps(c, p, sigma.im, chain, closure)


def _witness_for(c: NormalizedConjunction, M: Assignment) -> Witness | None:
    sigma = canonical_partition(M, c)
    g = canonical_board(M, c)
    if compliance_violations(sigma, g):
        return None
    p = extract_trace(sigma, g.F, g.Q, board=g)
    gamma: set[int] = set()
    chains: dict[int, tuple[PumpingChain, frozenset[int]]] = {}
    for x in c.infinite_vars():
        im = sigma.image(x)
        if gamma & im:
            continue
        found = False
        for s in sorted(im):
            if g.is_red(s):
                continue
            for chain, closure in find_pumping_chains(p, s, limit=CHAIN_TRIES):
                try:
                    _check_pumps(c, p, sigma.im, chain, closure)
                except WitnessViolation:
                    continue
                chains[s] = (chain, closure)
                gamma.add(s)
                found = True
                break
            if found:
                break
        if not found:
            return None
    return Witness(dict(M), p, frozenset(gamma), chains, formula_hash(c))


# ------------------------------------------------------------------ enumeration


def _define(lit: Literal, M: Mapping[str, HFSet]) -> HFSet | None:
    """Value forced on the first argument of a functional literal, if computable."""
    from .semantics import eval_term

    t = term_of_literal(lit)
    if t is None or lit.kind == "eq" and lit.args[0] == lit.args[1]:
        return None
    try:
        return eval_term(t, M)
    except (KeyError, ResourceLimitError):
        return None


def models(c: NormalizedConjunction, rank_bound: int) -> Iterator[dict[str, HFSet]]:
    """All models of ``c`` with values of rank at most ``rank_bound``, in canonical order.

    Variables vary in declaration order, the last one fastest; literals are
    checked as soon as their variables are bound.
    """
    universe = enumerate_level(rank_bound + 1)
    allowed = frozenset(universe)
    order = list(c.vars)
    finite_free = [l for l in c.literals if l.kind != "infinite"]
    due: list[list[Literal]] = [[] for _ in order]
    definers: list[list[Literal]] = [[] for _ in order]
    pos = {v: i for i, v in enumerate(order)}
    for lit in finite_free:
        due[max(pos[a] for a in lit.args)].append(lit)
        if term_of_literal(lit) is not None:
            x = lit.args[0]
            if all(pos[a] < pos[x] for a in lit.args[1:]):
                definers[pos[x]].append(lit)
    M: dict[str, HFSet] = {}

    def rec(i: int) -> Iterator[dict[str, HFSet]]:
        if i == len(order):
            yield dict(M)
            return
        v = order[i]
        if definers[i]:
            forced = _define(definers[i][0], M)
            candidates = (forced,) if forced is not None and forced in allowed else ()
        else:
            candidates = universe
        for val in candidates:
            M[v] = val
            if all(holds(l, M) for l in due[i]):
                yield from rec(i + 1)
        M.pop(v, None)

    yield from rec(0)


def decide_mlssp(c: NormalizedConjunction, rank_bound: int) -> Verdict:
    if any(l.kind == "infinite" for l in c.literals):
        raise ValueError("decide_mlssp does not accept !finite literals")
    for M in models(c, rank_bound):
        return Sat(M, c)
    if rank_bound >= rank_bound_c(len(c.vars)):
        return Unsat()
    return NoModelUpTo(rank_bound)


def decide_mlsspf(c: NormalizedConjunction, rank_bound: int) -> Verdict:
    if not c.infinite_vars():
        return decide_mlssp(c, rank_bound)
    skipped = 0
    for M in models(strip_infinite(c), rank_bound):
        if any(not M[x] for x in c.infinite_vars()):
            continue
        try:
            w = _witness_for(c, M)
        except ResourceLimitError:
            skipped += 1
            continue
        if w is not None:
            return SatWitness(w, c)
    return NoModelUpTo(rank_bound, skipped)


def decide(f: Formula, rank_bound: int, mode: str = "auto") -> Verdict:
    """Try each DNF conjunction in order; the first satisfiable one wins."""
    conjs = normalize(f)
    use_f = mode == "mlsspf" or mode == "auto" and any(c.has_finiteness() for c in conjs)
    verdicts = []
    for c in conjs:
        v = decide_mlsspf(c, rank_bound) if use_f else decide_mlssp(c, rank_bound)
        if isinstance(v, (Sat, SatWitness)):
            return v
        verdicts.append(v)
    if verdicts and all(isinstance(v, Unsat) for v in verdicts):
        return Unsat()
    return NoModelUpTo(rank_bound, sum(getattr(v, "skipped", 0) for v in verdicts))


# ------------------------------------------------------------------ oracle


def _nest(s: HFSet) -> frozenset:
    return frozenset(_nest(m) for m in s)


def _oracle_holds(kind: str, v: list[frozenset]) -> bool:
    if kind == "eq":
        return v[0] == v[1]
    if kind == "neq":
        return v[0] != v[1]
    if kind == "empty":
        return v[0] == frozenset()
    if kind == "union":
        return v[0] == v[1] | v[2]
    if kind == "inter":
        return v[0] == v[1] & v[2]
    if kind == "diff":
        return v[0] == v[1] - v[2]
    if kind == "sub":
        return v[0] <= v[1]
    if kind == "nsub":
        return not v[0] <= v[1]
    if kind == "in":
        return v[0] in v[1]
    if kind == "notin":
        return v[0] not in v[1]
    if kind == "pow":
        items = list(v[1])
        subsets = {frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)}
        return v[0] == frozenset(subsets)
    if kind == "enum":
        return v[0] == frozenset(v[1:])
    if kind == "finite":
        return True
    if kind == "infinite":
        return False
    raise ValueError(kind)


def oracle_satisfies(c: NormalizedConjunction, rank_bound: int) -> dict[str, HFSet] | None:
    """Naive product enumeration with its own evaluator; for testing only."""
    universe = enumerate_level(rank_bound + 1)
    nested = [_nest(s) for s in universe]
    for combo in itertools.product(range(len(universe)), repeat=len(c.vars)):
        env = {v: nested[i] for v, i in zip(c.vars, combo)}
        if all(_oracle_holds(l.kind, [env[a] for a in l.args]) for l in c.literals):
            return {v: universe[i] for v, i in zip(c.vars, combo)}
    return None


def verdict_to_json(v: Verdict, *, verbose: bool = False) -> dict:
    out: dict = {"verdict": v.name}
    if isinstance(v, NoModelUpTo):
        out["rank_bound"] = v.rank_bound
        if v.skipped:
            out["skipped_candidates"] = v.skipped
    if isinstance(v, (Sat, SatWitness)):
        synth = v.conjunction.synthetic if v.conjunction is not None else ()
        out["model"] = model_to_json(v.model, synth, verbose)
    return out
