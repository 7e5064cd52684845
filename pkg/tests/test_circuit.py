import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odealgebra import circuit as C
from odealgebra import fixtures
from odealgebra.errors import MalformedCircuit, ParseError, UnsupportedGate
from odealgebra.oracle import popcount_mod


# -- gate semantics ---------------------------------------------------------------------


def test_mod_gate_examples():
    assert C.gate_value(C.MOD, 2, [1, 1]) == 1
    assert C.gate_value(C.MOD, 2, [1, 1, 1]) == 0
    assert C.gate_value(C.MOD, 3, [1, 1, 1]) == 1


def test_empty_fan_in():
    assert C.gate_value(C.AND, None, []) == 1
    assert C.gate_value(C.OR, None, []) == 0
    assert C.gate_value(C.MOD, 5, []) == 1


def test_majority_is_strict():
    assert C.gate_value(C.MAJ, None, [1, 1, 0]) == 1
    assert C.gate_value(C.MAJ, None, [1, 0]) == 0
    assert C.gate_value(C.MAJ, None, []) == 0


@given(st.lists(st.integers(0, 1), max_size=20), st.integers(2, 7))
def test_mod_semantics(bits, p):
    assert C.gate_value(C.MOD, p, bits) == int(sum(bits) % p == 0)


# -- evaluation -----------------------------------------------------------------------------


def test_inputs_are_msb_first():
    c = fixtures.identity(3)
    assert C.eval_circuit(c, [1, 0, 0]) == [1, 0, 0]
    assert C.eval_int(c, 0b100) == 0b100
    assert C.bits_of(6, 3) == [1, 1, 0] and C.int_of([1, 1, 0]) == 6


def test_parity_fixture_is_mod2_convention():
    c = fixtures.parity_of(4)
    assert [C.eval_int(c, x) for x in range(16)] == [1 - popcount_mod(x, 2) for x in range(16)]


def test_eval_all_matches_eval_int():
    for c in fixtures.suite():
        if c.width <= 8:
            assert list(C.eval_all(c)) == [C.eval_int(c, x) for x in range(1 << c.width)]


def test_wrong_input_length():
    with pytest.raises(ValueError):
        C.eval_circuit(fixtures.identity(3), [1, 0])


def test_structure_errors():
    cb = C.CircuitBuilder(2)
    a = cb.gate(C.AND, [5])
    with pytest.raises(MalformedCircuit):
        cb.build([a])
    cb = C.CircuitBuilder(2)
    with pytest.raises(MalformedCircuit):
        cb.build([cb.inp(4)])


# -- normal form ------------------------------------------------------------------------------


def test_validate_nf_examples():
    assert C.validate_nf(fixtures.parity_of(4)) == []
    cb = C.CircuitBuilder(2)
    bad = cb.gate(C.AND, [cb.inp(0), cb.inp(1)], level=1)
    assert any(d.code == "kind" for d in C.validate_nf(cb.build([bad])))
    cb = C.CircuitBuilder(2)
    skip = cb.gate(C.AND, [cb.inp(0)], level=2)
    assert any(d.code == "edge" for d in C.validate_nf(cb.build([skip])))


def test_validate_nf_mixed_moduli_on_one_level():
    cb = C.CircuitBuilder(2)
    o = cb.gate(C.OR, [cb.inp(0)], level=1)
    a = cb.gate(C.AND, [o], level=2)
    m2, m3 = cb.gate(C.MOD, [a], 2, 3), cb.gate(C.MOD, [a], 3, 3)
    assert any(d.code == "modulus" for d in C.validate_nf(cb.build([m2, m3])))


def test_validate_nf_output_below_top():
    cb = C.CircuitBuilder(1)
    o = cb.gate(C.OR, [cb.inp(0)], level=1)
    a = cb.gate(C.AND, [o], level=2)
    assert any(d.code == "output" for d in C.validate_nf(cb.build([a, o])))


def test_fixture_suite_is_normal_form():
    suite = fixtures.suite()
    assert len(suite) >= 10
    assert {c.width for c in suite} >= {2, 10}
    for c in suite:
        assert C.validate_nf(c) == [], c.meta


def test_normalize_fixpoint():
    c = fixtures.parity_of(4)
    assert C.normalize(c) is c


def test_normalize_and_into_and():
    cb = C.CircuitBuilder(3)
    a1 = cb.gate(C.AND, [cb.inp(0), cb.inp(1)])
    a2 = cb.gate(C.AND, [a1, cb.ninp(2)])
    c = cb.build([a2, a1])
    n = C.normalize(c)
    assert C.validate_nf(n) == []
    assert list(C.eval_all(n)) == [C.eval_int(c, x) for x in range(8)]


def test_normalize_separates_moduli():
    cb = C.CircuitBuilder(3)
    m2 = cb.gate(C.MOD, [cb.inp(0), cb.inp(1)], 2)
    m3 = cb.gate(C.MOD, [cb.inp(0), cb.inp(1), cb.inp(2)], 3)
    c = cb.build([m2, m3])
    n = C.normalize(c)
    assert C.validate_nf(n) == []
    assert n.moduli() == {2, 3}
    assert list(C.eval_all(n)) == [C.eval_int(c, x) for x in range(8)]


def test_normalize_rejects_majority():
    cb = C.CircuitBuilder(2)
    with pytest.raises(UnsupportedGate):
        C.normalize(cb.build([cb.gate(C.MAJ, [cb.inp(0), cb.inp(1)])]))


def test_lift_outputs():
    c = fixtures.parity_of(3)
    up = C.lift_outputs(c, 9)
    assert up.depth == 9 and C.validate_nf(up) == []
    assert list(C.eval_all(up)) == list(C.eval_all(c))


@st.composite
def random_circuits(draw):
    width = draw(st.integers(1, 6))
    p = draw(st.sampled_from([2, 3]))
    cb = C.CircuitBuilder(width)
    ids = [cb.inp(j, None) for j in range(width)] + [cb.ninp(j, None) for j in range(width)]
    for _ in range(draw(st.integers(1, 10))):
        kind = draw(st.sampled_from([C.AND, C.OR, C.MOD, C.CONST]))
        if kind == C.CONST:
            ids.append(cb.gate(C.CONST, (), draw(st.integers(0, 1))))
            continue
        preds = draw(st.lists(st.sampled_from(ids), max_size=4))
        ids.append(cb.gate(kind, preds, p if kind == C.MOD else None))
    outs = draw(st.lists(st.sampled_from(ids[2 * width:] or ids), min_size=1, max_size=3))
    return cb.build(outs)


@settings(max_examples=150, deadline=None)
@given(random_circuits())
def test_normalize_preserves_function(c):
    n = C.normalize(c)
    assert C.validate_nf(n) == []
    assert list(C.eval_all(n)) == [C.eval_int(c, x) for x in range(1 << c.width)]


# -- connection functions ------------------------------------------------------------------------


def test_conn_funs_examples():
    c = fixtures.parity_of(2)
    cf = C.make_conn_funs(c)
    for gid, g in c.gates.items():
        for p in g.preds:
            assert cf.C(0, cf.number[p], cf.number[gid]) == 1
    inp = next(g for g, v in c.gates.items() if v.kind == C.INPUT)
    assert cf.L0_in(cf.number[inp], 0) == 1
    assert cf.L(1, 10_000, 0) == 0
    assert cf.L(99, cf.number[inp], 0) == 0


def test_conn_funs_rebuild_adjacency():
    for c in fixtures.suite():
        if any(g.kind == C.CONST for g in c.gates.values()):
            continue
        cf = C.make_conn_funs(c)
        expected = {cf.number[g]: {cf.number[p] for p in v.preds} for g, v in c.gates.items()}
        assert cf.adjacency() == expected


def test_conn_funs_need_normal_form():
    cb = C.CircuitBuilder(1)
    with pytest.raises(MalformedCircuit):
        C.make_conn_funs(cb.build([cb.gate(C.AND, [cb.inp(0)], level=1)]))


def test_conn_tables_agree_with_methods():
    from odealgebra import engine as G

    c = fixtures.nested(4)
    cf = C.make_conn_funs(c)
    p = G.Program({d.name: d for d in cf.defs()})
    ev = p.evaluator()
    top = max(hi for lo, hi in cf.blocks.values())
    for a, b in itertools.product(range(top), repeat=2):
        assert ev("conn_C", 0, a, b) == cf.C(0, a, b)
    for e in range(1, cf.depth + 1):
        assert all(ev(f"conn_L{e}", t, 0) == cf.L(e, t, 0) for t in range(top))
    for j in range(len(c.outputs) + 1):
        assert all(ev("conn_out", j, t) == cf.Out(j, t) for t in range(top))


# -- text format -------------------------------------------------------------------------------------


def test_text_round_trip():
    for c in fixtures.suite():
        text = C.format_circuit(c)
        assert text.startswith("circuit-format 1\nwidth ")
        back = C.parse_circuit(text)
        assert back.gates == c.gates and back.levels == c.levels and back.outputs == c.outputs
        assert np.array_equal(C.eval_all(back), C.eval_all(c))


def test_text_comments_and_unlevelled():
    text = "circuit-format 1\n# a comment\nwidth 2 outputs 2\n0 - in:0\n1 - in:1\n2 - mod:3 0 1  # two\n"
    c = C.parse_circuit(text)
    assert c.levels == {} and c.gates[2].arg == 3


@pytest.mark.parametrize("text", [
    "width 2 outputs 0\n0 0 in:0",
    "circuit-format 1\n",
    "circuit-format 1\nwidth x outputs\n",
    "circuit-format 1\nwidth 1 outputs 0\n0 0 xor 1",
    "circuit-format 1\nwidth 1 outputs 0\n0 0 in:0\n0 0 in:0",
    "circuit-format 1\nwidth 1 outputs 0\n0 q in:0",
])
def test_text_errors(text):
    with pytest.raises((ParseError, MalformedCircuit)):
        C.parse_circuit(text)
