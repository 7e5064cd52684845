import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odealgebra import expr as E
from odealgebra.errors import HSlotOutOfRange, ParseError, UnboundVariable

x, y = E.Var("x"), E.Var("y")


# -- evaluation ---------------------------------------------------------------------


def test_sg_of_negative_is_zero():
    assert E.eval_expr(E.Sg(E.Const(-4)), {}) == 0


def test_div2_floors_negative():
    assert E.eval_expr(E.Div2(E.Const(-7)), {}) == -4


def test_additive_identity():
    assert E.eval_expr(E.Add(x, E.Const(0)), {"x": 9}) == 9


def test_slots_and_f():
    e = E.Add(E.Mul(E.HCall(1), E.F), E.HCall(0))
    assert E.eval_expr(e, {}, fval=5, hvals=[2, 3]) == 17


def test_unbound_and_missing_slot():
    with pytest.raises(UnboundVariable):
        E.eval_expr(x, {})
    with pytest.raises(HSlotOutOfRange):
        E.eval_expr(E.HCall(2), {}, hvals=[1])


def test_on_mul_sees_operands():
    seen = []
    E.eval_expr(E.Mul(E.Const(3), x), {"x": 4}, on_mul=lambda a, b: seen.append((a, b)))
    assert seen == [(3, 4)]


# -- degree and classification -------------------------------------------------------


def test_degree_examples():
    assert E.degree(E.Sg(E.Mul(x, x)), {"x"}) == 0
    assert E.degree(E.Add(E.Mul(x, x), y), {"x"}) == 2
    assert E.degree(E.Const(5), {"x"}) == 0
    assert E.degree(E.Div2(E.Mul(x, y)), {"x", "y"}) == 2


def test_classify_examples():
    fs = {E.FCALL}
    assert E.classify(E.Sg(E.F), fs) is E.Classification.ESSENTIALLY_CONSTANT
    assert E.classify(E.Add(E.Mul(E.Var("a"), E.F), E.Var("b")), fs) is E.Classification.ESSENTIALLY_LINEAR
    assert E.classify(E.Mul(E.F, E.F), fs) is E.Classification.HIGHER


def test_is_limited():
    assert E.is_limited(E.Add(x, E.Div2(y)))
    assert not E.is_limited(E.Mul(E.Const(2), x))
    assert not E.is_limited(E.Sg(E.Mul(x, y)))


def test_f_shape_helpers():
    assert E.f_outside_sg(E.Add(E.F, E.Sg(E.F)))
    assert not E.f_outside_sg(E.Sg(E.Add(E.F, x)))
    cs, ok = E.f_sg_shapes(E.Add(E.Sg(E.Sub(E.F, E.Const(3))), E.HCall(0)))
    assert (cs, ok) == ([3], True)
    assert not E.f_sg_shapes(E.Sg(E.Add(E.F, E.Const(1))))[1]


def test_split_linear():
    A, B = E.split_linear(E.Add(E.Mul(E.HCall(0), E.F), E.HCall(1)))
    for f in range(-3, 4):
        for h0 in range(3):
            env = dict(fval=f, hvals=[h0, 5])
            assert E.eval_expr(A, {}, **env) * f + E.eval_expr(B, {}, **env) == h0 * f + 5
    assert E.split_linear(E.Mul(E.F, E.F)) is None
    assert E.split_linear(E.Div2(E.F)) is None


# -- text syntax -----------------------------------------------------------------------


def test_parse_and_format():
    e = E.parse_expr("(add (mul h1 f) (cosg (sub k 2)))")
    assert e == E.Add(E.Mul(E.HCall(1), E.F), E.Sub(E.Const(1), E.Sg(E.Sub(E.HCall(0), E.Const(2)))))
    assert E.parse_expr(E.format_expr(e)) == e


def test_parse_errors():
    for bad in ("(add 1)", "(pow 2 3)", "(sg 1 2)", "("):
        with pytest.raises(ParseError):
            E.parse_expr(bad)


def test_reserved_names():
    assert E.is_reserved("f") and E.is_reserved("h12") and not E.is_reserved("y1")


# -- properties ----------------------------------------------------------------------------

leaves = st.one_of(
    st.integers(-5, 5).map(E.Const),
    st.sampled_from(["x", "y"]).map(E.Var),
    st.just(E.F),
    st.integers(0, 1).map(E.HCall),
)
exprs = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.builds(E.Add, sub, sub), st.builds(E.Sub, sub, sub), st.builds(E.Mul, sub, sub),
        st.builds(E.Div2, sub), st.builds(E.Sg, sub),
    ),
    max_leaves=12,
)


def _degree_again(e, s):
    # second, independently written recursion over the same clauses
    match e:
        case E.Const() | E.Sg():
            return 0
        case E.Var(name=n):
            return int(n in s)
        case E.FCall():
            return int(E.FCALL in s)
        case E.HCall(index=i):
            return int(f"h{i}" in s)
        case E.Div2(arg=a):
            return _degree_again(a, s)
        case E.Mul(left=a, right=b):
            return _degree_again(a, s) + _degree_again(b, s)
        case E.Add(left=a, right=b) | E.Sub(left=a, right=b):
            return max(_degree_again(a, s), _degree_again(b, s))


@given(exprs, st.sets(st.sampled_from(["x", "y", E.FCALL, "h0", "h1"])))
def test_degree_matches_second_recursion(e, s):
    assert E.degree(e, s) == _degree_again(e, s)


@given(exprs)
def test_sg_hides_degree(e):
    assert E.degree(E.Sg(e), {"x", "y", E.FCALL}) == 0


@given(exprs, st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(0, 1), st.integers(0, 1))
def test_eval_deterministic(e, vx, vy, f, h0, h1):
    env = {"x": vx, "y": vy}
    assert E.eval_expr(e, env, f, [h0, h1]) == E.eval_expr(e, env, f, [h0, h1])


@given(exprs)
def test_text_round_trip(e):
    assert E.parse_expr(E.format_expr(e)) == e


@settings(max_examples=200)
@given(exprs, st.integers(-6, 6), st.integers(-6, 6), st.integers(0, 1), st.integers(0, 1))
def test_split_linear_is_exact(e, vx, f, h0, h1):
    parts = E.split_linear(e)
    if parts is None:
        return
    A, B = parts
    env = {"x": vx, "y": 2}
    assert E.contains_f(A) is False or not E.f_outside_sg(A)
    a = E.eval_expr(A, env, f, [h0, h1])
    b = E.eval_expr(B, env, f, [h0, h1])
    assert a * f + b == E.eval_expr(e, env, f, [h0, h1])
