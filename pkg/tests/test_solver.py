import json

import pytest

from setsat.errors import ResourceLimitError, WitnessViolation
from setsat.hfset import EMPTY, hf
from setsat.solver import (
    NoModelUpTo, Sat, SatWitness, Unsat, Witness, decide, decide_mlssp, decide_mlsspf,
    formula_hash, models, oracle_satisfies, rank_bound_c, verdict_to_json, verify_witness,
)
from setsat.semantics import satisfies
from setsat.syntax import conjunction, parse, strip_infinite

O = EMPTY
A = hf(O)


def test_empty_variable():
    v = decide_mlssp(conjunction(["x = 0"]), 1)
    assert isinstance(v, Sat) and v.model == {"x": O}


def test_powerset_of_empty():
    v = decide_mlssp(conjunction(["x = pow(y)", "y = 0"]), 2)
    assert isinstance(v, Sat)
    assert v.model == {"x": A, "y": O}


def test_membership_cycle_has_no_small_model():
    v = decide_mlssp(conjunction(["x in y", "y in x"]), 3)
    assert isinstance(v, NoModelUpTo) and v.rank_bound == 3


def test_mlssp_rejects_infinite_literals():
    with pytest.raises(ValueError):
        decide_mlssp(conjunction(["!finite(x)"]), 1)


def test_unsat_is_out_of_reach():
    c = conjunction(["x != x"])
    assert rank_bound_c(1) == 59
    assert isinstance(decide_mlssp(c, 3), NoModelUpTo)
    with pytest.raises(ResourceLimitError):
        decide_mlssp(c, 6)


@pytest.mark.parametrize(
    "literals,bound,expected",
    [
        (["x != y"], 1, {"x": O, "y": A}),
        (["x = {y}"], 2, {"x": A, "y": O}),
        (["x sub y", "x nsub y"], 2, None),
    ],
)
def test_oracle_examples(literals, bound, expected):
    assert oracle_satisfies(conjunction(literals), bound) == expected


def test_oracle_at_bound_zero_has_only_the_empty_set():
    assert oracle_satisfies(conjunction(["x != y"]), 0) is None


def test_models_are_in_canonical_order_and_satisfy():
    c = conjunction(["x sub y", "x != y"])
    found = list(models(c, 1))
    assert found == [{"x": O, "y": A}]
    c = conjunction(["x = un(y, z)"], vars=["y", "z", "x"])
    found = list(models(c, 1))
    assert len(found) == 4
    assert all(satisfies(c, M) for M in found)


def test_finite_and_infinite_together():
    v = decide_mlsspf(conjunction(["finite(x)", "!finite(x)"]), 2)
    assert isinstance(v, NoModelUpTo)


def test_finite_alone_is_plain_sat():
    v = decide(parse("finite(x) & x = 0"), 1)
    assert isinstance(v, Sat)


def test_infinite_variable_gets_a_witness():
    c = conjunction(["!finite(x)"])
    v = decide_mlsspf(c, 3)
    assert isinstance(v, SatWitness)
    assert v.witness.model == {"x": hf(O, A)}
    verify_witness(c, v.witness)


def test_empty_and_infinite():
    c = conjunction(["x = 0", "!finite(y)"])
    v = decide_mlsspf(c, 3)
    assert isinstance(v, SatWitness)
    assert v.witness.model["x"] is O
    verify_witness(c, v.witness)


def test_infinite_needs_rank_two():
    assert isinstance(decide_mlsspf(conjunction(["!finite(x)"]), 0), NoModelUpTo)


def test_witness_json_round_trip():
    c = conjunction(["!finite(x)"])
    w = decide_mlsspf(c, 3).witness
    data = json.loads(json.dumps(w.to_json()))
    back = Witness.from_json(data)
    assert back.to_json() == w.to_json()
    verify_witness(c, back)
    with pytest.raises(ValueError):
        Witness.from_json({"model": {}})


def test_witness_for_another_formula_is_refused():
    w = decide_mlsspf(conjunction(["!finite(x)"]), 3).witness
    with pytest.raises(WitnessViolation) as info:
        verify_witness(conjunction(["!finite(x)", "x != 0"]), w)
    assert info.value.label == "hash"


def test_formula_hash_depends_on_literals_and_vars():
    assert formula_hash(conjunction(["x = 0"])) == formula_hash(conjunction(["x = 0"]))
    assert formula_hash(conjunction(["x = 0"])) != formula_hash(conjunction(["y = 0"]))
    assert formula_hash(conjunction(["x = 0"])) != formula_hash(conjunction(["x = 0"], vars=["x", "y"]))


def test_rank_bound_values():
    # frozen from an independent evaluation of ceil(25/24*m + 5) * 2**(2**m + m) + 3
    assert [rank_bound_c(n) for n in range(6)] == [13, 59, 515, 515, 18435, 18435]
    values = [rank_bound_c(n) for n in range(18)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_decide_tries_disjuncts_in_order():
    v = decide(parse("(x in x) | x = 0"), 1)
    assert isinstance(v, Sat) and v.model["x"] is O


def test_decide_is_deterministic():
    f = parse("!finite(y) & x in y")
    a = verdict_to_json(decide(f, 3))
    b = verdict_to_json(decide(f, 3))
    assert a == b


def test_verdict_json_hides_auxiliary_variables():
    f = parse("x = un(y, pow(z))")
    v = decide(f, 1)
    plain = verdict_to_json(v)
    assert set(plain["model"]) == {"x", "y", "z"}
    assert len(verdict_to_json(v, verbose=True)["model"]) > 3
    assert plain["verdict"] == "Sat"


def test_verdict_names():
    assert Unsat().name == "Unsat"
    assert NoModelUpTo(2).name == "NoModelUpTo"


def test_witness_models_satisfy_the_finite_part():
    c = conjunction(["x in y", "!finite(y)"])
    w = decide_mlsspf(c, 3).witness
    assert satisfies(strip_infinite(c), w.model)
