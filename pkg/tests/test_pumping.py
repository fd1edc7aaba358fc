import pytest

from setsat.board import induced_board, node, places_in
from setsat.errors import ChainViolation, ImitationViolation, PumpError, SimulationViolation
from setsat.hfset import EMPTY, hf
from setsat.process import FormativeProcess, extract_trace, validate
from setsat.pumping import (
    SIM_MODES, PumpingChain, WeakContext, check_chain, check_imitation_segment,
    check_simulation, find_pumping_chains, natural_gamma, path_violations, pump,
    pump_with_embedding, pumping_cycles,
)
from setsat.semantics import TransitivePartition, model_from_partition, satisfies
from setsat.syntax import strip_infinite

from imitation_cases import all_minus, edit, pumped
from instances import AB, CORPUS, A, B, O

IDS = [inst.name for inst in CORPUS]

# p0 = {0,{0}}, p1 = {{0,{0}}}, p2 = {{{0,{0}}}}: T({p0}) = {p0,p1}, T({p1}) = {p2}
THREE = TransitivePartition((frozenset({O, A}), frozenset({AB}), frozenset({hf(AB)})))


@pytest.fixture(scope="module")
def three():
    return extract_trace(THREE)


def test_three_place_board_shape(three):
    g = three.board
    assert g.T[node(0)] == node(0, 1)
    assert g.T[node(1)] == node(2)


def test_chain_through_cycle_to_tail_end(three):
    found = find_pumping_chains(three, 2)
    assert found
    chain, closure = found[0]
    assert chain.path.cycle_places == (0,)
    # stage 1 leaves 0 unused at p0; {p1} is first nonempty at stage 3
    assert chain.to_json() == {
        "cycle": [[0], 0, [0]], "tail": [1, [1], 2], "segments": [0, 1],
        "m_vec": [1, 3], "q0": 0, "sigma": 2,
    }
    check_chain(three, chain, closure)


def test_no_cycle_means_no_chain():
    sigma = TransitivePartition((frozenset({O}), frozenset({A})))
    p = extract_trace(sigma)
    assert list(pumping_cycles(p.board)) == []
    assert find_pumping_chains(p, 1) == []


def test_red_target_has_no_chain():
    p = extract_trace(THREE)
    red = FormativeProcess(p.board.recolor(node(2)), p.steps)
    assert find_pumping_chains(red, 2) == []


@pytest.mark.parametrize("inst", CORPUS, ids=IDS)
def test_found_chains_pass_the_checker(inst):
    found = find_pumping_chains(inst.process, inst.target)
    assert found
    for chain, closure in found:
        check_chain(inst.process, chain, closure)
        assert not path_violations(inst.board, chain.path)


def test_chain_json_round_trip(three):
    chain, _ = find_pumping_chains(three, 2)[0]
    assert PumpingChain.from_json(chain.to_json()) == chain
    with pytest.raises(ValueError):
        PumpingChain.from_json({**chain.to_json(), "cycle": [[0], 0]})


def _replace(chain, **kw):
    fields = dict(path=chain.path, ends=chain.ends, m=chain.m, q0=chain.q0, sigma=chain.sigma)
    fields.update(kw)
    return PumpingChain(**fields)


def test_m_sequence_order(three):
    chain, closure = find_pumping_chains(three, 2)[0]
    assert len(chain.m) == 2
    with pytest.raises(ChainViolation) as info:
        check_chain(three, _replace(chain, m=(chain.m[1] + 1, chain.m[1])), closure)
    assert info.value.label == "m-sequence"


def test_closure_missing_a_local_trash():
    inst = next(i for i in CORPUS if i.name == "p-node-tail")
    chain, closure = inst.chain_and_closure
    extra = closure - chain.path.places()
    assert extra
    with pytest.raises(ChainViolation) as info:
        check_chain(inst.process, chain, closure - extra)
    assert info.value.label == "closed"
    assert info.value.detail == "closure is not closed"


def test_chain_i_needs_unused_element(three):
    chain, closure = find_pumping_chains(three, 2)[0]
    with pytest.raises(ChainViolation) as info:
        check_chain(three, _replace(chain, m=(0,) + chain.m[1:]), closure)
    assert info.value.label == "chain.i"


def test_pump_grows_the_target(three):
    chain, closure = find_pumping_chains(three, 2)[0]
    sizes = []
    for k in (1, 2, 3):
        out = pump(all_minus(three), chain, k, closure)
        validate(out)
        sizes.append(len(out.block(2)))
    assert len(three.block(2)) < sizes[0] < sizes[1] < sizes[2]


def test_pump_rejects_bad_input(three):
    chain, closure = find_pumping_chains(three, 2)[0]
    with pytest.raises(ValueError):
        pump(all_minus(three), chain, 0, closure)
    with pytest.raises(PumpError) as info:
        pump(all_minus(three), _replace(chain, q0=2), 1, closure)
    assert info.value.label == "chain.i"


@pytest.mark.parametrize("inst", CORPUS, ids=IDS)
def test_pump_keeps_minus_sizes_and_red_cardinality(inst):
    p, r, W = pumped(inst.name, 2)
    hat = r.process
    for q in range(p.n_places):
        assert len(hat.minus_block(q)) == len(p.block(q))
        if p.board.is_red(q):
            assert not hat.surplus_block(q)
            assert len(hat.block(q)) == len(p.block(q))
    assert hat.surplus_places() <= W


# -------------------------------------------------------------- simulation


@pytest.mark.parametrize("mode", [m for m in SIM_MODES if m != "weakly-imitates"])
def test_identity_simulation(three, mode):
    check_simulation(THREE, THREE, [0, 1, 2], mode, Q=[0], red=[1], L=2)


def test_identity_weak_imitation(three):
    ctx = WeakContext(three, three.length, all_minus(three), three.length, frozenset())
    check_simulation(THREE, THREE, [0, 1, 2], "weakly-imitates", context=ctx)


def test_red_cardinality_is_reported_first():
    small = [frozenset({O})]
    big = [frozenset({O, A})]
    with pytest.raises(SimulationViolation) as info:
        check_simulation(small, big, [0], "imitates-upwards", red=[0])
    assert info.value.label == "(4')"
    with pytest.raises(SimulationViolation) as info:
        check_simulation(small, big, [0], "conditions-1-4", red=[0])
    assert info.value.label == "red"


def test_simulation_clause_failures():
    with pytest.raises(SimulationViolation) as info:
        check_simulation([frozenset({O})], [frozenset({O, A})], [0], "imitates-upwards")
    assert info.value.label == "(1)"
    with pytest.raises(SimulationViolation) as info:
        check_simulation(THREE, THREE, [0, 1], "conditions-1-4")
    assert info.value.label == "bijection"
    swapped = [THREE.blocks[1], THREE.blocks[0], THREE.blocks[2]]
    with pytest.raises(SimulationViolation) as info:
        check_simulation(THREE, swapped, [0, 1, 2], "simulates-upwards")
    assert info.value.label == "in-simulation"
    with pytest.raises(ValueError):
        check_simulation(THREE, THREE, [0, 1, 2], "weakly-imitates")


def test_weak_minus_size_clause(three):
    p, r, W = pumped("infinite-x")
    ctx = WeakContext(p, p.length, r.process, 0, W)
    with pytest.raises(SimulationViolation) as info:
        check_simulation(p.blocks(), r.process.blocks(0), [0], "weakly-imitates", context=ctx)
    assert info.value.label == "(i)"


@pytest.mark.parametrize("inst", CORPUS, ids=IDS)
def test_pumped_partition_simulates_the_original(inst):
    p, r, W = pumped(inst.name)
    hat = r.process
    g = p.board
    ident = list(range(p.n_places))
    red = places_in(g.F)
    for mode in ("conditions-1-4", "simulates-upwards", "imitates-upwards"):
        check_simulation(p.blocks(), hat.blocks(), ident, mode, Q=g.Q, red=red)
    ctx = WeakContext(p, p.length, hat, hat.length, W)
    check_simulation(p.blocks(), hat.blocks(), ident, "weakly-imitates", Q=g.Q, red=red, context=ctx)
    # conditions 1-4 hold, so the finite part stays satisfied by the pumped model
    pumped_model = model_from_partition(TransitivePartition(hat.blocks()), inst.sigma.im)
    pumped_model = {v: pumped_model.get(v, EMPTY) for v in inst.model}
    assert satisfies(strip_infinite(inst.conj), pumped_model)


# -------------------------------------------------------------- imitation


@pytest.mark.parametrize("inst", CORPUS, ids=IDS)
def test_self_imitation(inst):
    p = inst.process
    check_imitation_segment(p, all_minus(p), natural_gamma(p), frozenset())


@pytest.mark.parametrize("inst", CORPUS, ids=IDS)
@pytest.mark.parametrize("k", [1, 3])
def test_pump_output_imitates(inst, k):
    p, r, W = pumped(inst.name, k)
    check_imitation_segment(p, r.process, r.gamma, W)


def test_corrupted_delta_cardinality(three):
    hat = all_minus(three)
    bad = edit(hat, 2, add={1: {hf(B)}})
    with pytest.raises(ImitationViolation) as info:
        check_imitation_segment(three, bad, natural_gamma(three), frozenset())
    assert info.value.label == "(ii)"
    assert info.value.step == 2
