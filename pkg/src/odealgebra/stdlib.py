"""Ready-made programs: modular bit counting, bounded quantifiers, notation recursions.

Every builder returns a validated :class:`~odealgebra.engine.Program` whose
entry point is the named function.  :class:`Builder` is the small assembler
shared by the builders and by the circuit compiler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import engine as G
from .errors import BadModulus, SchemaViolation


class Builder:
    """Accumulates definitions, sharing structurally identical ones."""

    def __init__(self, base: G.Program | None = None):
        self.defs: dict[str, G.FunctionDef] = dict(base.defs) if base is not None else {}
        self._by_body: dict[tuple, str] = {}
        self._counter = 0
        for d in self.defs.values():
            self._by_body.setdefault((d.arity, d.body, d.range), d.name)

    def add(self, d: G.FunctionDef) -> str:
        old = self.defs.get(d.name)
        if old is not None:
            if old != d:
                raise ValueError(f"conflicting definitions for {d.name!r}")
            return d.name
        self.defs[d.name] = d
        self._by_body.setdefault((d.arity, d.body, d.range), d.name)
        return d.name

    def arity(self, name: str) -> int:
        if name in self.defs:
            return self.defs[name].arity
        return G.FIXED_BASICS[name][0]

    def _fresh(self, hint: str) -> str:
        while True:
            self._counter += 1
            name = f"{hint}_{self._counter}"
            if name not in self.defs:
                return name

    def define(self, arity: int, body: G.Body, name: str | None = None, hint: str = "t", range=None) -> str:
        """Add a definition; anonymous ones are shared by body."""
        if name is None:
            key = (arity, body, range)
            found = self._by_body.get(key)
            if found is not None:
                return found
            name = self._fresh(hint)
        return self.add(G.FunctionDef(name, G.default_params(arity), body, range))

    # basics ---------------------------------------------------------------

    def proj(self, arity: int, i: int) -> str:
        return self.add(G.basic(f"pi{i}of{arity}", arity, "proj", i))

    def zero(self, arity: int) -> str:
        return self.add(G.basic(f"zero{arity}", arity, "zero"))

    def one(self, arity: int) -> str:
        return self.add(G.basic(f"one{arity}", arity, "one"))

    def const(self, arity: int, value: int) -> str:
        """Constant function built from ``one`` and ``add`` by doubling."""
        if value < 0:
            raise ValueError("constants are natural numbers")
        if value == 0:
            return self.zero(arity)
        if value == 1:
            return self.one(arity)
        half = self.const(arity, value // 2)
        twice = self.define(arity, G.Compose("add", (half, half)), name=f"c{value - value % 2}of{arity}")
        if value % 2 == 0:
            return twice
        return self.define(arity, G.Compose("add", (twice, self.one(arity))), name=f"c{value}of{arity}")

    # combinators ----------------------------------------------------------

    def comp(self, outer: str, *inners: str, name: str | None = None, hint: str = "t", range=None) -> str:
        arity = self.arity(inners[0]) if inners else 0
        return self.define(arity, G.Compose(outer, tuple(inners)), name=name, hint=hint, range=range)

    def at(self, f: str, arity: int, *positions: int, name: str | None = None) -> str:
        """``f`` applied to the given (1-based) argument positions of an ``arity``-ary call."""
        if not positions:
            return self.define(arity, G.Compose(f, ()), name=name, hint="at")
        return self.comp(f, *[self.proj(arity, i) for i in positions], name=name, hint="at")

    def schema(self, kind: G.SchemaKind, g: str, *steps: str, name: str | None = None, hint: str = "s") -> str:
        arity = self.arity(g) + 1
        return self.define(arity, G.Schema(kind, g, tuple(steps)), name=name, hint=hint)

    def table(self, arity: int, rows, name: str | None = None) -> str:
        return self.define(arity, G.Table(tuple(tuple(r) for r in rows)), name=name, hint="tab")

    def cosg(self, f: str, name: str | None = None) -> str:
        a = self.arity(f)
        return self.comp("sub", self.one(a), self.comp("sg", f), name=name, hint="cosg")

    def and_(self, a: str, b: str, name: str | None = None) -> str:
        # 0/1 conjunction: sg(a + b - 1)
        ar = self.arity(a)
        return self.comp("sg", self.comp("sub", self.comp("add", a, b), self.one(ar)), name=name, hint="and")

    def or_(self, a: str, b: str, name: str | None = None) -> str:
        return self.comp("sg", self.comp("add", a, b), name=name, hint="or")

    def xor(self, a: str, b: str, name: str | None = None) -> str:
        # for bits: sg(a - b) + sg(b - a)
        return self.comp("add", self.comp("sg", self.comp("sub", a, b)),
                         self.comp("sg", self.comp("sub", b, a)), name=name, hint="xor", range=G.BOOL)

    def times_const(self, f: str, n: int, name: str | None = None) -> str:
        """``n * f`` by repeated addition."""
        if n == 0:
            return self.zero(self.arity(f))
        acc = f
        for i in range(2, n + 1):
            acc = self.comp("add", acc, f, name=name if i == n else None, hint="mul")
        return acc

    def program(self, entry: str | None) -> G.Program:
        return G.Program(dict(self.defs), entry)


def _validated(p: G.Program) -> G.Program:
    diags = G.validate(p)
    if diags:
        raise SchemaViolation("builder produced an invalid program: " + "; ".join(map(str, diags)))
    return p


def _bit_at_length(b: Builder) -> str:
    # k(x, y) = BIT(len(x), y)
    return b.comp("bit", b.comp("len", b.proj(2, 1)), b.proj(2, 2), name="bit_at_len")


# -- counting -------------------------------------------------------------------


def build_cmodn(n: int) -> G.Program:
    """``cmod<n>(x)``: number of 1 bits of ``x`` modulo ``n`` via a counting ODE."""
    if not isinstance(n, int) or n < 2:
        raise BadModulus(f"modulus must be an integer >= 2, got {n!r}")
    b = Builder()
    k = _bit_at_length(b)
    count = b.schema(G.LengthNODE(n), b.zero(1), k, name=f"count_mod{n}")
    entry = b.comp(count, b.proj(1, 1), b.proj(1, 1), name=f"cmod{n}")
    return _validated(b.program(entry))


def build_cmod2() -> G.Program:
    """Parity of the 1 bits, written with the toggling ODE instead of the counter."""
    b = Builder()
    k = _bit_at_length(b)
    toggle = b.schema(G.Length2ODE(), b.zero(1), k, name="toggle_parity")
    entry = b.comp(toggle, b.proj(1, 1), b.proj(1, 1), name="cmod2")
    return _validated(b.program(entry))


def _bcount_into(b: Builder) -> str:
    k = _bit_at_length(b)
    total = b.schema(G.Length0ODE(), b.zero(1), k, name="bit_sum")
    return b.comp(total, b.proj(1, 1), b.proj(1, 1), name="bc")


def build_bcount() -> G.Program:
    """``bc(x)``: number of 1 bits of ``x``."""
    b = Builder()
    return _validated(b.program(_bcount_into(b)))


def build_modn_via_bcount(n: int) -> G.Program:
    """``bc(x) mod n`` as ``bc(x) - n * q(x)`` with ``q`` itself a bit sum.

    ``q(x)`` counts the ``j`` in ``1..len(x)`` with ``j * n <= bc(x)``, which
    is ``floor(bc(x) / n)`` because ``bc(x) <= len(x)``.
    """
    if not isinstance(n, int) or n < 2:
        raise BadModulus(f"modulus must be an integer >= 2, got {n!r}")
    b = Builder()
    bc = _bcount_into(b)
    # qk(z, v) = 1 - sg((len(z) + 1) * n - v)
    j = b.comp("add", b.comp("len", b.proj(2, 1)), b.one(2), name="len_succ")
    jn = b.times_const(j, n, name=f"len_succ_times{n}")
    qk = b.cosg(b.comp("sub", jn, b.proj(2, 2)), name=f"quot{n}_step")
    qs = b.schema(G.Length0ODE(), b.zero(1), qk, name=f"quot{n}_sum")
    q = b.comp(qs, b.proj(1, 1), bc, name=f"quot{n}")
    entry = b.comp("sub", bc, b.times_const(q, n, name=f"quot{n}_times{n}"), name=f"mod{n}")
    return _validated(b.program(entry))


# -- sharply bounded quantifiers --------------------------------------------------


def _context(rdef: G.FunctionDef, context: G.Program | None) -> Builder:
    b = Builder(context)
    b.add(rdef)
    if rdef.arity < 1:
        raise ValueError("the predicate needs the bounded variable as first argument")
    return b


def _pred_at(b: Builder, r: str, arity: int, first: str) -> str:
    """``r(first(x, y..), y..)`` as a function of ``(x, y..)``."""
    rest = [b.proj(arity, i) for i in range(2, arity + 1)]
    return b.comp(r, first, *rest)


def _pred_at_zero(b: Builder, r: str, p: int) -> str:
    # g(y..) = r(0, y..)
    zero = b.zero(p)
    rest = [b.proj(p, i) for i in range(1, p + 1)]
    return b.comp(r, zero, *rest, hint="g")


def bit_stream_into(b: Builder, r: str, kind: G.SchemaKind | None = None,
                    negate: bool = False, name: str | None = None) -> str:
    """Schema instance reading ``r(0, y..) .. r(len(x), y..)``, one value per length step.

    With the default doubling kind the result holds those values as bits,
    so ``sg`` of it is the bounded existential.  ``negate`` feeds the
    complements instead.  ``r`` takes ``(z, y..)``; the result ``(x, y..)``.
    """
    a = b.arity(r)
    g = _pred_at_zero(b, r, a - 1)
    nxt = b.comp("add", b.comp("len", b.proj(a, 1)), b.one(a), hint="lsucc")
    k = _pred_at(b, r, a, nxt)
    if negate:
        g, k = b.cosg(g), b.cosg(k)
    return b.schema(kind or G.LengthODE1(), g, k, name=name, hint="stream")


def _exists_into(b: Builder, r: str, negate: bool = False) -> str:
    suffix = "forall" if negate else "exists"
    return bit_stream_into(b, r, negate=negate, name=f"{r}_{suffix}_bits")


def bounded_max_into(b: Builder, g: str, h: str, name: str | None = None) -> str:
    """``max {g(z, y..) : z <= len(x), h(z, y..) = 1}`` for 0/1-valued ``g`` and ``h``; 0 when empty."""
    return b.comp("sg", bit_stream_into(b, b.and_(h, g)), name=name, hint="bmax")


def bounded_min_into(b: Builder, g: str, h: str, name: str | None = None) -> str:
    """``min {g(z, y..) : z <= len(x), h(z, y..) = 1}`` for 0/1-valued ``g`` and ``h``; 1 when empty."""
    implies = b.or_(b.cosg(h), g)
    return b.cosg(bit_stream_into(b, implies, negate=True), name=name)


def build_sb_exists(rdef: G.FunctionDef, context: G.Program | None = None) -> G.Program:
    """``1`` iff ``R(z, y..) = 1`` for some ``z <= len(x)``."""
    b = _context(rdef, context)
    f = _exists_into(b, rdef.name)
    return _validated(b.program(b.comp("sg", f, name=f"{rdef.name}_exists")))


def build_sb_forall(rdef: G.FunctionDef, context: G.Program | None = None) -> G.Program:
    """``1`` iff ``R(z, y..) = 1`` for every ``z <= len(x)``."""
    b = _context(rdef, context)
    f = _exists_into(b, rdef.name, negate=True)
    return _validated(b.program(b.cosg(f, name=f"{rdef.name}_forall")))


def build_sb_mu(rdef: G.FunctionDef, context: G.Program | None = None) -> G.Program:
    """Least ``z <= len(x)`` with ``R(z, y..) = 1``, or ``len(x) + 1`` if none.

    The marker ODE appends, per length step ``u``, whether a witness exists
    at or below ``u``; its own length then tells how many leading steps had
    none.
    """
    b = _context(rdef, context)
    r = rdef.name
    a = rdef.arity
    exists = b.comp("sg", _exists_into(b, r), name=f"{r}_exists")
    marks = b.schema(G.LengthODE1(), b.zero(a - 1), exists, name=f"{r}_mu_marks")
    lx = b.comp("len", b.proj(a, 1))
    top = b.comp("add", lx, b.cosg(exists))
    entry = b.comp("sub", top, b.comp("len", marks), name=f"{r}_mu")
    return _validated(b.program(entry))


# -- recursion on notation -----------------------------------------------------------


def _eval_kind(program: G.Program, name: str, kinds, x: int, ys) -> int:
    d = program.defs.get(name)
    if d is None or not isinstance(d.body, G.Schema) or not isinstance(d.body.kind, kinds):
        raise TypeError(f"{name} is not a {kinds} instance")
    return G.eval_program(program, name, (x, *ys))


def eval_crn(program: G.Program, name: str, x: int, *ys: int) -> int:
    return _eval_kind(program, name, G.CRN, x, ys)


def eval_kbrn(program: G.Program, name: str, x: int, *ys: int) -> int:
    return _eval_kind(program, name, G.KBRN, x, ys)


def twoode_to_onebrn(program: G.Program, name: str, new_name: str | None = None) -> G.Program:
    """Rewrite a toggling ODE instance as 1-bounded recursion on notation.

    Both digit steps use ``h(x', y.., b) = b XOR k(alpha(len(x')), y..)``.
    Reading the digits of ``x`` high to low, the prefix ``x'`` seen before
    the ``j``-th digit has length ``j``, so the step consults ``k`` at the
    same sample point ``alpha(j)`` as the ODE does.  ``alpha(len(x'))`` is
    spelled ``(1 # x') - x' - 1``.
    """
    d = program.defs.get(name)
    if d is None or not isinstance(d.body, G.Schema) or not isinstance(d.body.kind, G.Length2ODE):
        raise TypeError(f"{name} is not a toggling ODE instance")
    b = Builder(program)
    p = d.arity - 1
    a = p + 2  # (x', y.., b)
    prefix = b.proj(a, 1)
    top = b.comp("sub", b.comp("sub", b.comp("smash", b.one(a), prefix), prefix), b.one(a), hint="alpha_len")
    kk = b.comp(d.body.steps[0], top, *[b.proj(a, i) for i in range(2, p + 2)], hint="k_at")
    h = b.xor(b.proj(a, a), kk, name=f"{name}_flip")
    out = new_name or f"{name}_brn"
    b.schema(G.KBRN(1), d.body.g, h, h, name=out)
    return _validated(b.program(out))


@dataclass(frozen=True)
class NamedFamily:
    name: str
    parameter: str | None
    builder: Callable[..., G.Program]
    doc: str


FAMILIES: dict[str, NamedFamily] = {
    f.name: f
    for f in (
        NamedFamily("cmodn", "n", build_cmodn, "popcount modulo n (counting ODE)"),
        NamedFamily("cmod2", None, build_cmod2, "popcount parity (toggling ODE)"),
        NamedFamily("bcount", None, build_bcount, "popcount (bit-sum ODE)"),
        NamedFamily("modn-bcount", "n", build_modn_via_bcount, "popcount modulo n through the bit sum"),
    )
}
