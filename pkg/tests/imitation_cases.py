"""Targeted corruptions of pumped processes for the imitation checker.

Each case returns ``(original, imitating, gamma, closure)`` plus the clause
label the corruption is meant to break.
"""

from __future__ import annotations

from functools import lru_cache

from setsat.hfset import hf
from setsat.process import FormativeProcess, Step
from setsat.pumping import pump_with_embedding

from instances import AB, A, B, BB, CORPUS, O

BY_NAME = {inst.name: inst for inst in CORPUS}


def all_minus(p: FormativeProcess) -> FormativeProcess:
    return p.with_marking([{} for _ in p.steps])


@lru_cache(maxsize=None)
def pumped(name: str, k: int = 1):
    inst = BY_NAME[name]
    chain, closure = inst.chain_and_closure
    r = pump_with_embedding(all_minus(inst.process), chain, k, closure)
    return inst.process, r, closure


def edit(p: FormativeProcess, i: int, *, add=None, drop=(), add_surplus=None) -> FormativeProcess:
    """Copy of ``p`` with step ``i`` changed; ``add`` entries are minus, ``add_surplus`` surplus."""
    delta = {q: set(es) for q, es in p.steps[i].delta.items()}
    marks = [dict(m) for m in p.surplus]
    sur = {q: set(es) for q, es in marks[i].items()}
    for q, es in (add or {}).items():
        delta.setdefault(q, set()).update(es)
    for q, es in (add_surplus or {}).items():
        delta.setdefault(q, set()).update(es)
        sur.setdefault(q, set()).update(es)
    for e in drop:
        for es in (*delta.values(), *sur.values()):
            es.discard(e)
    steps = list(p.steps)
    steps[i] = Step(p.steps[i].move, delta)
    marks[i] = sur
    return FormativeProcess(p.board, tuple(steps), tuple(marks))


def unmark(p: FormativeProcess, i: int) -> FormativeProcess:
    marks = list(p.surplus)
    marks[i] = {}
    return p.with_marking(marks)


def _gamma_short():
    p, r, W = pumped("infinite-x")
    return p, r.process, r.gamma[:-1], W


def _gamma_flat():
    p, r, W = pumped("infinite-x")
    return p, r.process, (0, 1, 1), W


def _interpolated():
    p, r, W = pumped("infinite-x")
    return p, unmark(r.process, r.insertion[0]), r.gamma, W


def _extra_minus():
    p, r, W = pumped("red-singleton")
    return p, edit(r.process, r.gamma[2], add={1: {hf(A, B)}}), r.gamma, W


def _surplus_off_grand_move():
    # step 1 of two-cycle has move {p0}, which is not at its grand event
    p, r, W = pumped("two-cycle")
    assert p.grand_events[p.steps[1].move] != 1
    return p, edit(r.process, r.gamma[1], add_surplus={1: {AB}}), r.gamma, W


def _missing_dump():
    p, r, W = pumped("p-node-tail")
    dump = hf(hf(A, AB))
    s = r.gamma[3]
    assert dump in r.process.delta_surplus(s, 2)
    return p, edit(r.process, s, drop=[dump]), r.gamma, W


def _union_created_wrongly():
    """Swap a minus element for the Minus union of a node that is not at its grand event."""
    from setsat.board import places_in
    from setsat.hfset import union_all

    for name in BY_NAME:
        p, r, W = pumped(name)
        hat, gamma = r.process, r.gamma
        ge = p.grand_events
        for beta, step in enumerate(p.steps):
            if any(ge[G] == beta for G in p.board.Q):
                continue
            s = gamma[beta]
            orig = p.blocks(beta)
            mb = [b - hat.surplus_elements for b in hat.blocks(s)]
            created = {e for es in step.delta.values() for e in es}
            for G in range(1 << p.n_places):
                Gs = places_in(G)
                if ge[G] == beta or not all(orig[q] for q in Gs):
                    continue
                if union_all(orig[q] for q in Gs) in created:
                    continue
                u = union_all(mb[q] for q in Gs)
                if u in hat.born:
                    continue
                q, es = next((q, es) for q, es in hat.steps[s].delta.items() if es - hat.delta_surplus(s, q))
                victim = min(es - hat.delta_surplus(s, q))
                return p, edit(hat, s, drop=[victim], add={q: {u}}), gamma, W
    raise AssertionError("no node suitable for a (v) corruption")


def _grand_union_replaced():
    p, r, W = pumped("red-singleton")
    s = r.gamma[2]
    grand = hf(O, A, B)
    assert grand in r.process.steps[s].delta[1]
    return p, edit(r.process, s, drop=[grand], add={1: {hf(O, B)}}), r.gamma, W


def _red_surplus():
    p, r, W = pumped("red-singleton")
    assert p.board.is_red(1)
    return p, edit(r.process, r.insertion[0], add_surplus={1: {hf(A, B)}}), r.gamma, W


def _surplus_outside_closure():
    p, r, W = pumped("subset")
    assert 0 not in W and not p.board.is_red(0)
    return p, edit(r.process, r.insertion[0], add_surplus={0: {hf(BB)}}), r.gamma, W


MUTATIONS = {
    "gamma-too-short": (_gamma_short, "gamma"),
    "gamma-not-increasing": (_gamma_flat, "gamma"),
    "inserted-step-books-minus": (_interpolated, "interpolated"),
    "extra-minus-element": (_extra_minus, "(ii)"),
    "surplus-off-grand-move": (_surplus_off_grand_move, "(iii)"),
    "missing-powerset-dump": (_missing_dump, "(iv)"),
    "union-created-wrongly": (_union_created_wrongly, "(v)"),
    "grand-union-replaced": (_grand_union_replaced, "(vi)"),
    "surplus-at-red-place": (_red_surplus, "(vii)"),
    "surplus-outside-closure": (_surplus_outside_closure, "(viii)"),
}
