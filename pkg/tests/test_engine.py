import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odealgebra import engine as G
from odealgebra import expr as E
from odealgebra import oracle
from odealgebra.errors import ArityError, DomainError, NotLinear, SchemaViolation, UnknownFunction
from odealgebra.stdlib import build_cmod2
from odealgebra.syntax import parse_program

import generators as T

PRELUDE = """program-format 1
(def id (x) (basic proj 1))
(def p1 (x y) (basic proj 1))
(def p2 (x y) (basic proj 2))
(def zero0 () (basic zero))
(def zero1 (y) (basic zero))
(def one1 (x) (basic one))
(def one2 (x y) (basic one))
(def zero2 (x y) (basic zero))
(def two1 (y) (compose add one1 one1))
(def sub2 (x y) (basic sub))
(def sgsub (x y) (compose sg sub2))
"""


def prog(body: str, entry: str | None = None) -> G.Program:
    text = PRELUDE + body + (f"(entry {entry})\n" if entry else "")
    return parse_program(text)


# -- basic functions ---------------------------------------------------------------


def test_basic_examples():
    assert G.length(0) == 0
    assert G.smash(3, 5) == 29
    assert G.bit(1, 6) == 1
    assert [G.alpha(u) for u in range(4)] == [0, 1, 3, 7]


def test_basics_reject_negative():
    with pytest.raises(DomainError):
        G.length(-1)
    with pytest.raises(DomainError):
        G.bit(0, -2)


# -- run_recurrence and the trace -----------------------------------------------------


def test_ode1_unrolls_to_seven():
    p = prog("(def s (x) (schema l-ode1 :g zero0 :k one1))\n")
    tr = G.run_recurrence(p, "s", (7,))
    assert tr.values == [0, 1, 3, 7]
    assert [pt.u for pt in tr.points] == [-1, 0, 1, 2]
    assert [pt.at for pt in tr.points] == [0, 0, 1, 3]
    assert tr.final == 7


def test_zero_argument_gives_initial_value():
    p = prog("(def s (x y) (schema l-ode1 :g two1 :k one2))\n")
    for y in range(5):
        assert G.run_recurrence(p, "s", (0, y)).values == [2]


def test_node_wraps_at_top():
    # k = 1 at every step: the counter climbs to n-1, and the next step gives 0
    for n in (2, 3, 5):
        p = prog(f"(def s (x) (schema l-node :n {n} :g zero0 :k one1))\n")
        tr = G.run_recurrence(p, "s", (G.alpha(n),))
        assert tr.values[n - 1] == n - 1
        assert tr.values[n] == 0
        assert tr.values == [i % n for i in range(n + 1)]


def test_cmod2_closed_form_example():
    p = build_cmod2()
    assert G.closed_form(p, "toggle_parity", (2, 3)) == 0
    assert G.eval_program(p, "toggle_parity", (2, 3)) == 0


def test_closed_form_examples():
    p = prog("(def z (x) (schema l-0ode :g zero0 :k zk))\n(def zk (x) (basic zero))\n"
             "(def t (x) (schema l-2ode :g zero0 :k one1))\n")
    assert all(G.closed_form(p, "z", (x,)) == 0 for x in range(64))
    assert G.closed_form(p, "t", (7,)) == 1
    assert G.closed_form(p, "t", (7,)) == oracle.popcount_mod(7, 2)


def test_closed_form_rejects_nonlinear():
    p = prog("(def s (x) (schema lambda-ode :lambda len :P (mul f f) :g zero0 :h ()))\n")
    with pytest.raises(NotLinear):
        G.closed_form(p, "s", (3,))


# -- eval_program -----------------------------------------------------------------------


def test_eval_examples():
    assert G.eval_program(prog("", "id"), "id", (42,)) == 42
    assert G.eval_program(build_cmod2(), "cmod2", (11,)) == 1
    assert G.eval_program(prog(""), "sgsub", (5, 9)) == 0


def test_eval_errors():
    p = prog("(def bad (x) (compose nothere id))\n")
    with pytest.raises(UnknownFunction):
        p.evaluator()("bad", 1)
    with pytest.raises(ArityError):
        p.evaluator()("id", 1, 2)


def test_memo_modes_agree():
    p = build_cmod2()
    plain = [G.Evaluator(p)("cmod2", x) for x in range(256)]
    for mode in ("call", "persistent"):
        ev = G.Evaluator(p, memo=mode)
        assert [ev("cmod2", x) for x in range(256)] == plain


def test_observer_sees_traces():
    seen = []
    ev = G.Evaluator(build_cmod2(), observer=lambda name, args, tr: seen.append((name, tr.final)))
    assert ev("cmod2", 5) == 0
    assert seen == [("toggle_parity", 0)]


def test_dynamic_step_range():
    p = prog("(def s (x) (schema l-2ode :g zero0 :k kk))\n(def kk (x) (compose add one1 one1))\n")
    with pytest.raises(SchemaViolation, match="k out of range"):
        G.eval_program(p, "s", (1,))


def test_notation_recursions():
    p = prog("(def c (x) (schema crn :g zero0 :h0 h0 :h1 h1))\n(def h0 (x) (basic zero))\n"
             "(def h1 (x) (basic one))\n"
             "(def b (x) (schema kbrn :kmax 1 :g zero0 :h0 k1 :h1 k1))\n(def k1 (x b) (basic one))\n")
    assert all(G.eval_program(p, "c", (x,)) == x for x in range(256))
    assert all(G.eval_program(p, "b", (x,)) == (1 if x else 0) for x in range(64))


# -- validation -----------------------------------------------------------------------------


def codes(p):
    return {d.code for d in G.validate(p)}


def test_well_formed_ode1_has_no_diagnostics():
    assert G.validate(prog("(def s (x) (schema l-ode1 :g zero0 :k one1))\n", "s")) == []


def test_g_out_of_range_from_declared_range():
    p = prog("(def g (y) (basic proj 1) :range (0 2))\n(def s (x y) (schema l-2ode :g g :k one2))\n")
    assert any("g out of range" in d.message for d in G.validate(p))


def test_bare_f_in_b0ode():
    p = prog("(def s (x) (schema l-b0ode :K (sub 1 f) :g zero0 :h (one1)))\n")
    assert "f-shape" in codes(p)


def test_other_diagnostics():
    assert "cycle" in codes(prog("(def a (x) (compose b id))\n(def b (x) (compose a id))\n"))
    assert "unknown-ref" in codes(prog("(def a (x) (compose zz id))\n"))
    assert "arity" in codes(prog("(def a (x) (compose add id))\n"))
    assert "constant" in codes(prog("(def s (x) (schema l-node-ns :n 3 :c 0 :g zero0 :k one1))\n"))
    assert "modulus" in codes(prog("(def s (x) (schema l-node :n 1 :g zero0 :k one1))\n"))
    assert "strict" in codes(prog("(def s (x) (schema l-pode :A (sg f) :B 1 :g zero0 :h ()))\n"))
    assert "limited" in codes(prog("(def s (x) (schema l-b0ode :K (sg (mul h0 f)) :g zero0 :h (one1)))\n"))


def test_check_raises():
    with pytest.raises(SchemaViolation):
        G.check(prog("(def a (x) (compose zz id))\n"))


# -- properties ----------------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**12 - 1), st.integers(0, 15))
def test_length_sampling(seed, x, y):
    p, name = T.linear_instance(random.Random(seed))
    ev = p.evaluator()
    assert ev(name, x, y) == ev(name, G.alpha(G.length(x)), y)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**12 - 1), st.integers(0, 15))
def test_closed_form_equals_recurrence(seed, x, y):
    p, name = T.linear_instance(random.Random(seed))
    assert G.closed_form(p, name, (x, y)) == G.run_recurrence(p, name, (x, y)).final


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3, 5]), st.integers(0, 2**12 - 1), st.integers(0, 15))
def test_counter_ranges(seed, n, x, y):
    p, names = T.counter_family(random.Random(seed), n)
    for name in names:
        assert all(0 <= v <= n - 1 for v in G.run_recurrence(p, name, (x, y)).values)
    tp, tname = T.toggle_instance(random.Random(seed))
    assert set(G.run_recurrence(tp, tname, (x, y)).values) <= {0, 1}
