import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odealgebra import sexpr
from odealgebra.errors import ParseError
from odealgebra.stdlib import FAMILIES, build_sb_mu
from odealgebra.syntax import format_program, parse_program
from odealgebra import engine as G

import generators as T


def test_sexpr_reader():
    assert sexpr.read_all("(a (b 1) -2) ; note\n c") == [["a", ["b", 1], -2], "c"]
    assert sexpr.read_one(sexpr.dumps(["x", [1, ["y"]]])) == ["x", [1, ["y"]]]
    for bad in ("(a", "a)", ""):
        with pytest.raises(ParseError):
            sexpr.read_one(bad)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_family_round_trip(family):
    fam = FAMILIES[family]
    p = fam.builder(3) if fam.parameter else fam.builder()
    text = format_program(p)
    assert text.startswith("program-format 1\n")
    q = parse_program(text)
    assert q == p
    assert format_program(q) == text


def test_table_wildcards_round_trip():
    R = G.FunctionDef("R", ("z", "y"), G.Table(((2, None), (None, 5))))
    p = build_sb_mu(R)
    assert parse_program(format_program(p)) == p
    assert "(2 _)" in format_program(p)


def test_declared_range_round_trip():
    text = "program-format 1\n(def g (y) (basic proj 1) :range (0 inf))\n(def h (y) (basic one) :range (0 1))\n"
    p = parse_program(text)
    assert p.defs["g"].range == (0, None) and p.defs["h"].range == (0, 1)
    assert parse_program(format_program(p)) == p


@pytest.mark.parametrize("text", [
    "(def a (x) (basic proj 1))",  # no header
    "program-format 1\n(def a (x))",
    "program-format 1\n(def a (x) (basic proj 1))\n(def a (x) (basic proj 1))",
    "program-format 1\n(def a (x) (schema nope :g b))",
    "program-format 1\n(def a (x) (schema l-node :g b :k c))",
    "program-format 1\n(frob)",
    "program-format 1\n(def a (x) (basic proj 1) :size (0 1))",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_program(text)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32))
def test_generated_programs_round_trip(seed):
    p, _ = T.linear_instance(random.Random(seed))
    assert parse_program(format_program(p)) == p
