import pytest

from setsat.board import (
    ColoredBoard, canonical_board, canonical_coloring, canonical_partition, complies,
    compliance_violations, downward_closure, fmt_node, induced_board, node, places_in,
    render_board, submasks,
)
from setsat.errors import ResourceLimitError
from setsat.hfset import EMPTY, hf
from setsat.semantics import TransitivePartition
from setsat.syntax import conjunction

O = EMPTY
A = hf(O)
B = hf(A)

ONE = TransitivePartition((frozenset({O}),))
TWO = TransitivePartition((frozenset({O}), frozenset({A})))


def test_node_helpers():
    assert node(0, 2) == 0b101
    assert places_in(0b101) == [0, 2]
    assert sorted(submasks(0b11)) == [0, 1, 2, 3]
    assert downward_closure([0b10]) == {0, 0b10}
    assert fmt_node(0b11) == "{p0,p1}"


def test_single_block_targets():
    g = induced_board(ONE)
    assert g.targets(0) == node(0)
    assert g.targets(node(0)) == 0


def test_two_block_targets():
    g = induced_board(TWO)
    assert g.targets(0) == node(0)
    assert g.targets(node(0)) == node(1)
    assert g.targets(node(1)) == 0
    assert g.targets(node(0, 1)) == 0


def test_canonical_coloring():
    sigma = TransitivePartition((frozenset({O}),), (frozenset({"x"}),))
    F, Q = canonical_coloring(sigma, conjunction(["finite(x)"]))
    assert F == node(0) and Q == frozenset()
    M = {"x": A, "y": O}
    c = conjunction(["x = pow(y)"])
    F, Q = canonical_coloring(canonical_partition(M, c), c)
    assert F == 0 and Q == {0, node(0)}
    c = conjunction(["x = y"])
    M = {"x": A, "y": A}
    assert canonical_coloring(canonical_partition(M, c), c) == (0, frozenset())


def test_enum_colors_red():
    M = {"x": hf(A), "y": A}
    c = conjunction(["x = {y}"])
    g = canonical_board(M, c)
    sigma = canonical_partition(M, c)
    assert g.F == sum(1 << q for q in sigma.image("x"))


def test_compliance_with_p_nodes():
    base = induced_board(TWO)
    assert complies(TWO, base.recolor(0, [0, node(0)]))
    # Pow*({p1}) = {{{0}}} is not in the domain
    bad = base.recolor(0, [0, node(1)])
    assert not complies(TWO, bad)
    assert any("P-node" in m for m in compliance_violations(TWO, bad))


def test_compliance_rejects_unclosed_q_and_wrong_targets():
    g = induced_board(TWO)
    assert "P-nodes are not downward closed" in compliance_violations(TWO, g.recolor(0, [node(0)]))
    wrong = ColoredBoard(2, (node(1), node(1), 0, 0))
    assert any("targets" in m for m in compliance_violations(TWO, wrong))


def test_board_limit():
    blocks = tuple(frozenset({e}) for e in [O, A, B, hf(O, A), hf(B), hf(O, B), hf(A, B), hf(O, A, B), hf(hf(O, A)), hf(hf(B)), hf(hf(A, B))])
    sigma = TransitivePartition(blocks)
    with pytest.raises(ResourceLimitError):
        induced_board(sigma)


def test_render_board_mentions_everything():
    g = induced_board(TWO).recolor(node(1), [0])
    text = render_board(TWO, g)
    assert "p1 (red)" in text
    assert "T({}) = {p0}" in text
    assert "digraph board {" in text
