"""sg-polynomial expressions: representation, exact evaluation, degree calculus.

An expression is built from integer constants, named variables, the
recursive slot ``f`` (the current value of the function being defined),
indexed step-function slots ``h0, h1, ...`` and the operations
``+``, ``-``, ``÷2`` (floor), ``×`` and ``sg``.  An expression without ``×``
is *limited*.

Textual syntax (one S-expression)::

    expr := INT | NAME | f | h | k | h<i>
          | (add expr expr) | (sub expr expr) | (mul expr expr)
          | (div2 expr) | (sg expr) | (cosg expr)

``h`` and ``k`` are aliases of ``h0``.  ``cosg e`` is expanded to
``(sub 1 (sg e))`` when parsed; there is no cosg node.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from . import sexpr
from .errors import HSlotOutOfRange, ParseError, UnboundVariable

#: Member name standing for the recursive slot in a :data:`VarSet`.
FCALL = "f"

RESERVED = frozenset({"f", "h", "k"})
_HSLOT = re.compile(r"h(\d+)$")


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FCall:
    pass


@dataclass(frozen=True)
class HCall:
    index: int


@dataclass(frozen=True)
class Add:
    left: "SgExpr"
    right: "SgExpr"


@dataclass(frozen=True)
class Sub:
    left: "SgExpr"
    right: "SgExpr"


@dataclass(frozen=True)
class Mul:
    left: "SgExpr"
    right: "SgExpr"


@dataclass(frozen=True)
class Div2:
    arg: "SgExpr"


@dataclass(frozen=True)
class Sg:
    arg: "SgExpr"


SgExpr = Union[Const, Var, FCall, HCall, Add, Sub, Mul, Div2, Sg]
VarSet = frozenset

F = FCall()


def cosg(e: SgExpr) -> SgExpr:
    return Sub(Const(1), Sg(e))


def is_reserved(name: str) -> bool:
    return name in RESERVED or _HSLOT.match(name) is not None


# -- evaluation ---------------------------------------------------------------


def eval_expr(
    e: SgExpr,
    env: Mapping[str, int],
    fval: int = 0,
    hvals: Sequence[int] = (),
    on_mul: Callable[[int, int], None] | None = None,
) -> int:
    """Evaluate ``e`` exactly over the integers.

    ``÷2`` is floor division, ``sg(v)`` is 1 for ``v > 0`` and 0 otherwise.
    ``on_mul`` is called with both operand values of every multiplication.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, FCall):
        return fval
    if isinstance(e, HCall):
        if not 0 <= e.index < len(hvals):
            raise HSlotOutOfRange(f"h{e.index} with {len(hvals)} step values")
        return hvals[e.index]
    if isinstance(e, Add):
        return eval_expr(e.left, env, fval, hvals, on_mul) + eval_expr(e.right, env, fval, hvals, on_mul)
    if isinstance(e, Sub):
        return eval_expr(e.left, env, fval, hvals, on_mul) - eval_expr(e.right, env, fval, hvals, on_mul)
    if isinstance(e, Mul):
        a = eval_expr(e.left, env, fval, hvals, on_mul)
        b = eval_expr(e.right, env, fval, hvals, on_mul)
        if on_mul is not None:
            on_mul(a, b)
        return a * b
    if isinstance(e, Div2):
        return eval_expr(e.arg, env, fval, hvals, on_mul) // 2
    if isinstance(e, Sg):
        return 1 if eval_expr(e.arg, env, fval, hvals, on_mul) > 0 else 0
    raise TypeError(f"not an SgExpr: {e!r}")


# -- degree calculus ----------------------------------------------------------


def _member(e: SgExpr, s: frozenset) -> bool:
    if isinstance(e, Var):
        return e.name in s
    if isinstance(e, FCall):
        return FCALL in s
    if isinstance(e, HCall):
        return f"h{e.index}" in s
    return False


def degree(e: SgExpr, s: frozenset | set) -> int:
    """Degree of the variable set ``s`` in ``e``.

    ``s`` holds variable names; :data:`FCALL` stands for the ``f`` slot and
    ``"h<i>"`` for step slots.
    """
    if isinstance(e, (Const, Sg)):
        return 0
    if isinstance(e, (Var, FCall, HCall)):
        return 1 if _member(e, s) else 0
    if isinstance(e, Div2):
        return degree(e.arg, s)
    if isinstance(e, (Add, Sub)):
        return max(degree(e.left, s), degree(e.right, s))
    if isinstance(e, Mul):
        return degree(e.left, s) + degree(e.right, s)
    raise TypeError(f"not an SgExpr: {e!r}")


class Classification(enum.Enum):
    ESSENTIALLY_CONSTANT = "essentially-constant"
    ESSENTIALLY_LINEAR = "essentially-linear"
    HIGHER = "higher"


def classify(e: SgExpr, s: frozenset | set) -> Classification:
    d = degree(e, s)
    if d == 0:
        return Classification.ESSENTIALLY_CONSTANT
    if d == 1:
        return Classification.ESSENTIALLY_LINEAR
    return Classification.HIGHER


# -- structural queries -------------------------------------------------------


def children(e: SgExpr) -> tuple[SgExpr, ...]:
    if isinstance(e, (Add, Sub, Mul)):
        return (e.left, e.right)
    if isinstance(e, (Div2, Sg)):
        return (e.arg,)
    return ()


def walk(e: SgExpr):
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def is_limited(e: SgExpr) -> bool:
    return not any(isinstance(n, Mul) for n in walk(e))


def contains_f(e: SgExpr) -> bool:
    return any(isinstance(n, FCall) for n in walk(e))


def free_vars(e: SgExpr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def h_slots(e: SgExpr) -> set[int]:
    return {n.index for n in walk(e) if isinstance(n, HCall)}


def f_outside_sg(e: SgExpr) -> bool:
    """True when some occurrence of ``f`` is not beneath an ``sg`` node."""
    if isinstance(e, FCall):
        return True
    if isinstance(e, Sg):
        return False
    return any(f_outside_sg(c) for c in children(e))


def f_sg_shapes(e: SgExpr) -> tuple[list[int], bool]:
    """Collect constants ``c`` of every ``sg(f - c)`` and report stray ``f``.

    Returns ``(cs, ok)`` where ``ok`` is False when ``f`` occurs anywhere
    other than as the left operand of a ``sub`` by a constant directly under
    ``sg``.
    """
    cs: list[int] = []

    def visit(node: SgExpr) -> bool:
        if isinstance(node, Sg):
            a = node.arg
            if isinstance(a, Sub) and isinstance(a.left, FCall) and isinstance(a.right, Const):
                cs.append(a.right.value)
                return True
            return visit(a)
        if isinstance(node, FCall):
            return False
        return all(visit(c) for c in children(node))

    ok = visit(e)
    return cs, ok


# -- text syntax --------------------------------------------------------------

_BINARY = {"add": Add, "sub": Sub, "mul": Mul}
_UNARY = {"div2": Div2, "sg": Sg}


def from_form(form) -> SgExpr:
    if isinstance(form, int):
        return Const(form)
    if isinstance(form, str):
        if form == "f":
            return F
        if form in ("h", "k"):
            return HCall(0)
        m = _HSLOT.match(form)
        if m:
            return HCall(int(m.group(1)))
        return Var(form)
    if not form or not isinstance(form[0], str):
        raise ParseError(f"bad expression form: {sexpr.dumps(form)}")
    op, args = form[0], form[1:]
    if op in _BINARY:
        if len(args) != 2:
            raise ParseError(f"{op} takes 2 operands")
        return _BINARY[op](from_form(args[0]), from_form(args[1]))
    if op in _UNARY:
        if len(args) != 1:
            raise ParseError(f"{op} takes 1 operand")
        return _UNARY[op](from_form(args[0]))
    if op == "cosg":
        if len(args) != 1:
            raise ParseError("cosg takes 1 operand")
        return cosg(from_form(args[0]))
    raise ParseError(f"unknown operator {op!r}")


def parse_expr(text: str) -> SgExpr:
    return from_form(sexpr.read_one(text))


def to_form(e: SgExpr):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FCall):
        return "f"
    if isinstance(e, HCall):
        return f"h{e.index}"
    for name, cls in _BINARY.items():
        if isinstance(e, cls):
            return [name, to_form(e.left), to_form(e.right)]
    for name, cls in _UNARY.items():
        if isinstance(e, cls):
            return [name, to_form(e.arg)]
    raise TypeError(f"not an SgExpr: {e!r}")


def format_expr(e: SgExpr) -> str:
    return sexpr.dumps(to_form(e))


# -- linear decomposition -----------------------------------------------------


def _plus(a: SgExpr, b: SgExpr) -> SgExpr:
    if a == Const(0):
        return b
    if b == Const(0):
        return a
    return Add(a, b)


def _minus(a: SgExpr, b: SgExpr) -> SgExpr:
    if b == Const(0):
        return a
    return Sub(a, b)


def _times(a: SgExpr, b: SgExpr) -> SgExpr:
    if a == Const(0) or b == Const(0):
        return Const(0)
    if a == Const(1):
        return b
    if b == Const(1):
        return a
    return Mul(a, b)


def split_linear(e: SgExpr) -> tuple[SgExpr, SgExpr] | None:
    """Write ``e`` as ``A * f + B`` with ``A`` and ``B`` free of bare ``f``.

    Occurrences of ``f`` under ``sg`` stay inside ``A`` or ``B``.  Returns
    None when no such split exists: degree above one, or ``f`` (outside
    ``sg``) beneath ``÷2``, where floor division does not distribute.
    """
    fs = frozenset({FCALL})
    if isinstance(e, FCall):
        return Const(1), Const(0)
    if degree(e, fs) == 0:
        return Const(0), e
    if isinstance(e, (Add, Sub)):
        left, right = split_linear(e.left), split_linear(e.right)
        if left is None or right is None:
            return None
        comb = _plus if isinstance(e, Add) else _minus
        return comb(left[0], right[0]), comb(left[1], right[1])
    if isinstance(e, Mul):
        dl, dr = degree(e.left, fs), degree(e.right, fs)
        if dl + dr > 1:
            return None
        if dl == 0:
            inner = split_linear(e.right)
            if inner is None:
                return None
            return _times(e.left, inner[0]), _times(e.left, inner[1])
        inner = split_linear(e.left)
        if inner is None:
            return None
        return _times(inner[0], e.right), _times(inner[1], e.right)
    return None
