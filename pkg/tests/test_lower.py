import itertools
import random

import pytest

from odealgebra import circuit as C
from odealgebra import engine as G
from odealgebra import oracle
from odealgebra.errors import UnsupportedSchema, UnsupportedSymbol, WidthOverflow
from odealgebra.stdlib import Builder, build_bcount, build_cmod2, build_cmodn
from odealgebra.xlate import algebra_to_circuit, basic_to_circuit

import generators as T


def test_cmod2_at_width_3():
    low = algebra_to_circuit(build_cmodn(2), 3)
    assert low.evaluate_all() == [oracle.popcount_mod(x, 2) for x in range(8)]
    assert C.validate_nf(low.circuit) == []


def test_cmod3_at_width_6():
    low = algebra_to_circuit(build_cmodn(3), 6)
    assert low.evaluate_all() == [oracle.popcount_mod(x, 3) for x in range(64)]
    assert set(low.moduli) == {3}


def test_constant_zero_program():
    b = Builder()
    p = b.program(b.comp("add", b.zero(1), b.zero(1), name="z"))
    low = algebra_to_circuit(p, 4)
    assert {g.kind for g in low.circuit.gates.values()} == {C.CONST}
    assert [low.circuit.gates[o].arg for o in low.circuit.outputs] == [0]
    assert low.evaluate_all() == [0] * 16


@pytest.mark.parametrize("n", [2, 3, 5])
def test_depth_independent_of_width(n):
    depths = {algebra_to_circuit(build_cmodn(n), w).circuit.depth for w in range(3, 9)}
    assert len(depths) == 1


def test_one_mod_gate_per_counter_for_parity():
    # the toggling counter needs a single MOD-2 gate per output bit
    low = algebra_to_circuit(build_cmod2(), 6)
    source = {g for g, s in low.provenance.items() if s == "toggle_parity"}
    mods = [g for g in source if low.circuit.gates[g].kind == C.MOD]
    assert 1 <= len(mods) <= 2  # the gate and, in dual rail, its negation


def test_basic_examples():
    add = basic_to_circuit("add", 4)
    assert add.evaluate(5, 9) == 14
    assert basic_to_circuit("len", 4).evaluate(5) == 3
    for w in (1, 3, 5):
        d = basic_to_circuit("div2", w)
        assert d.evaluate_all() == [x >> 1 for x in range(1 << w)]


@pytest.mark.parametrize("symbol", ["add", "sub", "smash", "bit"])
def test_binary_basics_exhaustive(symbol):
    fn = G.FIXED_BASICS[symbol][1]
    for w in (1, 2, 3, 4):
        low = basic_to_circuit(symbol, w)
        for a, b in itertools.product(range(1 << w), repeat=2):
            assert low.evaluate(a, b) == fn(a, b), (symbol, w, a, b)


@pytest.mark.parametrize("symbol", ["sg", "len", "div2", "cosg", "proj", "zero", "one"])
def test_unary_basics_exhaustive(symbol):
    ref = {"cosg": lambda v: 1 - (v > 0), "proj": lambda v: v, "zero": lambda v: 0, "one": lambda v: 1}
    fn = ref.get(symbol) or G.FIXED_BASICS[symbol][1]
    for w in (1, 3, 5):
        assert basic_to_circuit(symbol, w).evaluate_all() == [fn(x) for x in range(1 << w)]


def test_unknown_symbol():
    with pytest.raises(UnsupportedSymbol):
        basic_to_circuit("pow", 3)


def test_out_of_fragment_schema():
    with pytest.raises(UnsupportedSchema):
        algebra_to_circuit(build_bcount(), 4)


def test_width_overflow():
    b = Builder()
    x = b.proj(1, 1)
    t = x
    for _ in range(4):
        t = b.comp("smash", t, t)
    with pytest.raises(WidthOverflow):
        algebra_to_circuit(b.program(t), 8, max_bits=64)


def test_table_and_signed_output():
    b = Builder()
    tab = b.table(1, [(3,), (5,)])
    p = b.program(b.comp("sub", tab, b.comp("len", b.proj(1, 1)), name="m"))
    low = algebra_to_circuit(p, 4)
    ev = p.evaluator()
    assert low.evaluate_all() == [ev("m", x) for x in range(16)]
    assert min(low.evaluate_all()) < 0


def test_random_fragment_programs_small():
    rng = random.Random(99)
    for _ in range(6):
        p = T.fragment_program(rng, rng.choice((2, 3)))
        ev = p.evaluator()
        depths = set()
        for w in (3, 5):
            low = algebra_to_circuit(p, w)
            assert low.evaluate_all() == [ev("main", x) for x in range(1 << w)]
            depths.add(low.circuit.depth)
        assert len(depths) == 1


def test_provenance_names_definitions():
    low = algebra_to_circuit(build_cmodn(3), 4)
    assert set(low.provenance) <= set(low.circuit.gates)
    assert "count_mod3" in set(low.provenance.values())
