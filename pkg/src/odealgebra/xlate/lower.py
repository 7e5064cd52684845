"""Program to circuit: lowering of the bounded-depth fragment.

Supported: the basic functions, composition, finite tables, the doubling
ODE and the modular counters (toggling, counting, starred and non-strict
counting ODEs), with a single modulus per program.  Everything else raises
:class:`UnsupportedSchema`.

Values are :class:`Word` objects: a list of Boolean nodes (least
significant first, two's complement when the value range contains
negatives) plus the integer interval the value is known to lie in.  The
interval fixes the bit width of every intermediate value and drives
constant folding.

Every word also carries a *nominal depth*: an upper bound on the depth of
its bits, computed from the program structure by fixed per-block rules,
never from the width.  The finished circuit is buffered up to three times
the nominal depth of the entry, so its depth depends on the program alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import circuit as C
from .. import engine as G
from ..errors import UnsupportedSchema, UnsupportedSymbol, WidthOverflow

ZERO, ONE = 0, 1

# nominal depth added by each block (AND/OR count 1, MOD counts 2 because its
# negation needs an extra OR layer, NOT counts 0)
D_ADD = 5
D_SG = 2
D_LEN = 2
D_BIT = 2
D_SMASH = 3
D_TABLE = 2
D_ODE1 = 3
D_COUNT = 5


class Dag:
    """Hash-consed Boolean DAG with constant folding."""

    def __init__(self):
        self.nodes: list[tuple] = [("const", 0), ("const", 1)]
        self.index: dict[tuple, int] = {n: i for i, n in enumerate(self.nodes)}
        self.depth: list[int] = [0, 0]
        self.origin: list[str] = ["", ""]
        self.context = ""

    def _node(self, key: tuple, depth: int) -> int:
        found = self.index.get(key)
        if found is not None:
            return found
        self.nodes.append(key)
        self.depth.append(depth)
        self.origin.append(self.context)
        self.index[key] = len(self.nodes) - 1
        return len(self.nodes) - 1

    def inp(self, j: int) -> int:
        return self._node(("in", j), 0)

    def neg(self, a: int) -> int:
        if a <= 1:
            return 1 - a
        n = self.nodes[a]
        if n[0] == "not":
            return n[1]
        return self._node(("not", a), self.depth[a])

    def _junction(self, kind: str, xs: Sequence[int]) -> int:
        unit, absorb = (ONE, ZERO) if kind == "and" else (ZERO, ONE)
        kept = sorted({x for x in xs if x != unit})
        if absorb in kept:
            return absorb
        if not kept:
            return unit
        if len(kept) == 1:
            return kept[0]
        ks = set(kept)
        if any(self.nodes[x][0] == "not" and self.nodes[x][1] in ks for x in kept):
            return absorb
        return self._node((kind, tuple(kept)), 1 + max(self.depth[x] for x in kept))

    def and_(self, xs: Sequence[int]) -> int:
        return self._junction("and", xs)

    def or_(self, xs: Sequence[int]) -> int:
        return self._junction("or", xs)

    def xor(self, a: int, b: int) -> int:
        return self.or_([self.and_([a, self.neg(b)]), self.and_([self.neg(a), b])])

    def mod(self, p: int, xs: Sequence[int], pad: int = 0) -> int:
        """1 iff (number of 1s among ``xs``) + ``pad`` is divisible by ``p``."""
        counts: dict[int, int] = {}
        for x in xs:
            if x == ONE:
                pad += 1
            elif x != ZERO:
                counts[x] = counts.get(x, 0) + 1
        pad %= p
        items = tuple(sorted((x, c % p) for x, c in counts.items() if c % p))
        if not items:
            return ONE if pad == 0 else ZERO
        if len(items) == 1 and items[0][1] == 1:
            v = items[0][0]
            if pad == 0:
                return self.neg(v)
            if pad == p - 1:
                return v
            return ZERO
        return self._node(("mod", p, items, pad), 2 + max(self.depth[x] for x, _ in items))


def _width_for(lo: int, hi: int) -> int:
    if lo >= 0:
        return hi.bit_length()
    return max(hi.bit_length(), (-lo - 1).bit_length()) + 1


@dataclass(frozen=True)
class Word:
    bits: tuple[int, ...]
    lo: int
    hi: int
    depth: int  # nominal depth bound

    @property
    def signed(self) -> bool:
        return self.lo < 0

    def bit(self, i: int) -> int:
        if i < len(self.bits):
            return self.bits[i]
        if self.signed and self.bits:
            return self.bits[-1]
        return ZERO

    def const_value(self) -> int | None:
        if self.lo == self.hi:
            return self.lo
        if all(b <= 1 for b in self.bits):
            v = sum(b << i for i, b in enumerate(self.bits))
            if self.signed and self.bits and self.bits[-1]:
                v -= 1 << len(self.bits)
            return v
        return None

    @property
    def key(self):
        return (self.bits, self.lo, self.hi)


def const_word(v: int, depth: int = 0) -> Word:
    w = _width_for(v, v)
    return Word(tuple((v >> i) & 1 for i in range(w)), v, v, depth)


def _unbounded_check(lo, hi, max_bits, what):
    if hi is None or lo is None:
        raise WidthOverflow(f"{what}: value is not bounded")
    if _width_for(lo, hi) > max_bits:
        raise WidthOverflow(f"{what}: needs {_width_for(lo, hi)} bits, more than {max_bits}")


@dataclass
class LoweredCircuit:
    circuit: C.Circuit
    width: int  # bits per argument
    arity: int
    out_signed: bool
    nominal_depth: int
    provenance: dict[int, str] = field(default_factory=dict)
    moduli: tuple[int, ...] = ()

    def pack(self, args: Sequence[int]) -> int:
        x = 0
        for a in args:
            if not 0 <= a < (1 << self.width):
                raise ValueError(f"argument {a} does not fit in {self.width} bits")
            x = (x << self.width) | a
        return x

    def _decode(self, v):
        m = len(self.circuit.outputs)
        if self.out_signed and m:
            return v - (1 << m) if v >> (m - 1) else v
        return v

    def evaluate(self, *args: int) -> int:
        return self._decode(C.eval_int(self.circuit, self.pack(args)))

    def evaluate_all(self) -> list[int]:
        """Values on every packed input ``0 .. 2**(arity*width) - 1``."""
        return [self._decode(int(v)) for v in C.eval_all(self.circuit)]


class _Lowerer:
    def __init__(self, program: G.Program, max_bits: int):
        self.p = program
        self.dag = Dag()
        self.max_bits = max_bits
        self.memo: dict = {}
        self.moduli: set[int] = set()

    # words ---------------------------------------------------------------

    def word(self, lo: int, hi: int, depth: int, bit_fn, what: str) -> Word:
        _unbounded_check(lo, hi, self.max_bits, what)
        if lo == hi:
            return const_word(lo, depth)
        w = _width_for(lo, hi)
        return Word(tuple(bit_fn(i) for i in range(w)), lo, hi, depth)

    def input_word(self, arg_index: int, arity: int, width: int) -> Word:
        base = (arity - 1 - arg_index) * width
        return Word(tuple(self.dag.inp(base + i) for i in range(width)), 0, (1 << width) - 1, 0)

    # arithmetic blocks ---------------------------------------------------

    def add(self, a: Word, b: Word, negate_b: bool = False) -> Word:
        depth = max(a.depth, b.depth) + D_ADD
        if negate_b:
            lo, hi = a.lo - b.hi, a.hi - b.lo
        else:
            lo, hi = a.lo + b.lo, a.hi + b.hi
        ca, cb = a.const_value(), b.const_value()
        if ca is not None and cb is not None:
            return const_word(ca - cb if negate_b else ca + cb, depth)
        _unbounded_check(lo, hi, self.max_bits, "add/sub")
        if lo == hi:
            return const_word(lo, depth)
        W = _width_for(lo, hi)
        d = self.dag
        xs = [a.bit(i) for i in range(W)]
        ys = [d.neg(b.bit(i)) if negate_b else b.bit(i) for i in range(W)]
        cin = ONE if negate_b else ZERO
        gen = [d.and_([x, y]) for x, y in zip(xs, ys)]
        prop = [d.or_([x, y]) for x, y in zip(xs, ys)]
        out = []
        for i in range(W):
            terms = [d.and_([gen[j], *prop[j + 1:i]]) for j in range(i)]
            terms.append(d.and_([cin, *prop[:i]]))
            carry = d.or_(terms)
            out.append(d.xor(d.xor(xs[i], ys[i]), carry))
        return Word(tuple(out), lo, hi, depth)

    def div2(self, a: Word) -> Word:
        return self.word(a.lo // 2, a.hi // 2, a.depth, lambda i: a.bit(i + 1), "div2")

    def sg(self, a: Word) -> Word:
        depth = a.depth + D_SG
        if a.lo > 0:
            return const_word(1, depth)
        if a.hi <= 0:
            return const_word(0, depth)
        d = self.dag
        if a.signed:
            v = d.and_([d.neg(a.bits[-1]), d.or_(list(a.bits[:-1]))])
        else:
            v = d.or_(list(a.bits))
        return Word((v,), 0, 1, depth)

    def _length_selectors(self, a: Word) -> dict[int, int]:
        """``{L: [len(a) = L]}`` for a natural-number word."""
        d = self.dag
        bits = a.bits[:-1] if a.signed else a.bits
        W = len(bits)
        lo = max(a.lo, 0)
        sel = {}
        for L in range(lo.bit_length(), W + 1):
            above = [d.neg(bits[j]) for j in range(L, W)]
            sel[L] = d.and_(above if L == 0 else [bits[L - 1], *above])
        return sel

    def length(self, a: Word) -> Word:
        depth = a.depth + D_LEN
        lo, hi = max(a.lo, 0).bit_length(), max(a.hi, 0).bit_length()
        if lo == hi:
            return const_word(lo, depth)
        sel = self._length_selectors(a)
        d = self.dag
        return self.word(lo, hi, depth,
                         lambda b: d.or_([s for L, s in sel.items() if (L >> b) & 1]), "len")

    def _equals(self, a: Word, v: int) -> list[int] | None:
        """Literals whose conjunction says ``a == v`` (None: impossible)."""
        if not a.lo <= v <= a.hi:
            return None
        W = len(a.bits)
        d = self.dag
        return [a.bits[i] if (v >> i) & 1 else d.neg(a.bits[i]) for i in range(W)]

    def bit(self, i: Word, x: Word) -> Word:
        depth = max(i.depth, x.depth) + D_BIT
        ci = i.const_value()
        if ci is not None:
            if ci < 0:
                return const_word(0, depth)
            b = x.bit(ci)
            return const_word(b, depth) if b <= 1 else Word((b,), 0, 1, depth)
        d = self.dag
        terms = []
        for v in range(max(i.lo, 0), min(i.hi, len(x.bits) - 1) + 1):
            lits = self._equals(i, v)
            if lits is not None:
                terms.append(d.and_([*lits, x.bit(v)]))
        v = d.or_(terms)
        return const_word(v, depth) if v <= 1 else Word((v,), 0, 1, depth)

    def smash(self, x: Word, y: Word) -> Word:
        depth = max(x.depth, y.depth) + D_SMASH
        xlo, xhi = max(x.lo, 0), max(x.hi, 0)
        ylo, yhi = max(y.lo, 0), max(y.hi, 0)
        lo = (xlo << ylo.bit_length()) + ylo
        hi = (xhi << yhi.bit_length()) + yhi
        cy = y.const_value()
        d = self.dag
        if cy is not None:
            L = cy.bit_length()
            return self.word(lo, hi, depth, lambda b: y.bit(b) if b < L else x.bit(b - L), "smash")
        sel = self._length_selectors(y)

        def out(b):
            terms = [y.bit(b) if b < len(y.bits) else ZERO]
            for L, s in sel.items():
                if b >= L:
                    terms.append(d.and_([s, x.bit(b - L)]))
            return d.or_(terms)

        return self.word(lo, hi, depth, out, "smash")

    def table(self, body: G.Table, args: Sequence[Word]) -> Word:
        depth = max((a.depth for a in args), default=0) + D_TABLE
        d = self.dag
        terms = []
        for row in body.rows:
            lits: list[int] = []
            ok = True
            for a, v in zip(args, row):
                if v is None:
                    continue
                eq = self._equals(a, v)
                if eq is None:
                    ok = False
                    break
                lits += eq
            if ok:
                terms.append(d.and_(lits))
        v = d.or_(terms)
        return const_word(v, depth) if v <= 1 else Word((v,), 0, 1, depth)

    # schemas -------------------------------------------------------------

    def _steps(self, d: G.FunctionDef, x: Word, ys: tuple[Word, ...]):
        body: G.Schema = d.body
        g = self.call(body.g, ys)
        U = max(x.hi, 0).bit_length()
        ks = [self.call(body.steps[0], (const_word(G.alpha(u)), *ys)) for u in range(U)]
        return g, ks, U

    def ode1(self, d: G.FunctionDef, args: tuple[Word, ...]) -> Word:
        x, ys = args[0], args[1:]
        g, ks, U = self._steps(d, x, ys)
        depth = max([x.depth, g.depth, *(k.depth for k in ks)]) + D_ODE1
        glo, ghi = max(g.lo, 0), max(g.hi, 0)
        Lmin = max(x.lo, 0).bit_length()
        lo, hi = glo << Lmin, (ghi << U) + (1 << U) - 1
        kb = [k.bit(0) for k in ks]

        def value_bit(L, b):
            # after L steps: bits k_{L-1} .. k_0 below the bits of g
            return kb[L - 1 - b] if b < L else g.bit(b - L)

        cx = x.const_value()
        if cx is not None:
            L = max(cx, 0).bit_length()
            return self.word(lo, hi, depth, lambda b: value_bit(L, b), d.name)
        sel = self._length_selectors(x)
        dag = self.dag
        return self.word(lo, hi, depth,
                         lambda b: dag.or_([dag.and_([s, value_bit(L, b)]) for L, s in sel.items()]), d.name)

    def counter(self, d: G.FunctionDef, n: int, args: tuple[Word, ...]) -> Word:
        self.moduli.add(n)
        if len(self.moduli) > 1:
            raise UnsupportedSchema(f"several moduli {sorted(self.moduli)} in one program")
        x, ys = args[0], args[1:]
        g, ks, U = self._steps(d, x, ys)
        depth = max([x.depth, g.depth, *(k.depth for k in ks)]) + D_COUNT
        dag = self.dag
        xb = x.bits[:-1] if x.signed else x.bits
        terms = []
        for u, k in enumerate(ks):
            longer = dag.or_(list(xb[u:]))  # len(x) > u
            terms.append(dag.and_([k.bit(0), longer]))
        gl = [g.bit(b) for b in range(len(g.bits))]
        weighted = [gb for b, gb in enumerate(gl) for _ in range(pow(2, b, n))]
        inputs = terms + weighted
        residue = [dag.mod(n, inputs, (n - j) % n) for j in range(n)] if n > 2 else None
        if n == 2:
            e0 = dag.mod(2, inputs)
            residue = [e0, dag.neg(e0)]
        return self.word(0, n - 1, depth,
                         lambda b: dag.or_([residue[j] for j in range(n) if (j >> b) & 1]), d.name)

    # dispatch ------------------------------------------------------------

    def call(self, name: str, args: tuple[Word, ...]) -> Word:
        key = (name, tuple(a.key + (a.depth,) for a in args))
        got = self.memo.get(key)
        if got is not None:
            return got
        saved = self.dag.context
        self.dag.context = name
        try:
            w = self._call(name, args)
        finally:
            self.dag.context = saved
        self.memo[key] = w
        return w

    def _basic(self, sym: str, index, args: tuple[Word, ...]) -> Word:
        if sym == "zero":
            return const_word(0)
        if sym == "one":
            return const_word(1)
        if sym == "proj":
            return args[index - 1]
        if sym == "add":
            return self.add(*args)
        if sym == "sub":
            return self.add(args[0], args[1], negate_b=True)
        if sym == "div2":
            return self.div2(args[0])
        if sym == "sg":
            return self.sg(args[0])
        if sym == "len":
            return self.length(args[0])
        if sym == "bit":
            return self.bit(*args)
        if sym == "smash":
            return self.smash(*args)
        raise UnsupportedSymbol(sym)

    def _call(self, name: str, args: tuple[Word, ...]) -> Word:
        d = self.p.defs.get(name)
        if d is None:
            if name in G.FIXED_BASICS:
                return self._basic(name, None, args)
            raise UnsupportedSymbol(name)
        body = d.body
        if isinstance(body, G.Basic):
            return self._basic(body.symbol, body.index, args)
        if isinstance(body, G.Compose):
            inner = tuple(self.call(i, args) for i in body.inners)
            return self.call(body.outer, inner)
        if isinstance(body, G.Table):
            return self.table(body, args)
        kind = body.kind
        if isinstance(kind, G.LengthODE1):
            return self.ode1(d, args)
        if isinstance(kind, G.Length2ODE):
            return self.counter(d, 2, args)
        if isinstance(kind, (G.LengthNODE, G.LengthNODEStar)):
            return self.counter(d, kind.n, args)
        if isinstance(kind, G.NonStrictNODE) and kind.c == kind.n - 2:
            return self.counter(d, kind.n, args)
        raise UnsupportedSchema(f"{name}: {kind.tag} is outside the lowered fragment")

    # circuit emission ----------------------------------------------------

    def emit(self, out: Word, width: int) -> tuple[C.Circuit, dict[int, str]]:
        dag = self.dag
        cb = C.CircuitBuilder(width)
        pos: dict[int, int] = {}
        neg: dict[int, int] = {}
        origin: dict[int, str] = {}
        const_gate: dict[int, int] = {}

        def const(b):
            if b not in const_gate:
                const_gate[b] = cb.gate(C.CONST, (), b, None)
            return const_gate[b]

        def gate(kind, preds, arg, node):
            gid = cb.gate(kind, preds, arg, None)
            origin[gid] = dag.origin[node]
            return gid

        # iterative post-order to build both polarities
        def build(root: int, polarity: bool) -> int:
            stack = [(root, polarity, False)]
            while stack:
                n, pol, ready = stack.pop()
                table = pos if pol else neg
                if n in table:
                    continue
                node = dag.nodes[n]
                kind = node[0]
                if kind == "const":
                    table[n] = const(node[1] if pol else 1 - node[1])
                    continue
                if kind == "in":
                    table[n] = gate(C.INPUT if pol else C.NEG_INPUT, (), node[1], n)
                    continue
                if kind == "not":
                    child = node[1]
                    other = neg if pol else pos
                    if child in other:
                        table[n] = other[child]
                    else:
                        stack += [(n, pol, True), (child, not pol, False)]
                    continue
                if kind in ("and", "or"):
                    children = node[1]
                    child_table = pos if pol else neg
                    missing = [c for c in children if c not in child_table]
                    if missing:
                        stack.append((n, pol, True))
                        stack += [(c, pol, False) for c in missing]
                        continue
                    gk = {("and", True): C.AND, ("or", True): C.OR,
                          ("and", False): C.OR, ("or", False): C.AND}[(kind, pol)]
                    table[n] = gate(gk, [child_table[c] for c in children], None, n)
                    continue
                # mod node: children always positive
                _, p, items, pad = node
                missing = [c for c, _ in items if c not in pos]
                if missing:
                    stack.append((n, pol, True))
                    stack += [(c, True, False) for c in missing]
                    continue
                ins = [pos[c] for c, r in items for _ in range(r)]
                if pol:
                    table[n] = gate(C.MOD, ins + [const(1)] * pad, p, n)
                else:
                    alts = [gate(C.MOD, ins + [const(1)] * ((pad + j) % p), p, n) for j in range(1, p)]
                    table[n] = gate(C.OR, alts, None, n)
            return (pos if polarity else neg)[root]

        outs = [build(b, True) for b in reversed(out.bits or (ZERO,))]
        return cb.build(outs), origin


def algebra_to_circuit(p: G.Program, width: int, entry: str | None = None, max_bits: int = 64) -> LoweredCircuit:
    """Lower ``entry`` (default: the program entry) to a circuit over ``arity * width`` input bits.

    Argument ``i`` of ``arity`` occupies bits ``(arity-1-i)*width`` and up;
    the outputs are the bits of the value, two's complement when it can be
    negative.
    """
    name = entry or p.entry
    if name is None:
        raise UnsupportedSymbol("program has no entry point")
    if width < 1:
        raise ValueError("width must be at least 1")
    arity = p.arity_of(name)
    low = _Lowerer(p, max_bits)
    args = tuple(low.input_word(i, arity, width) for i in range(arity))
    out = low.call(name, args)
    actual = max((low.dag.depth[b] for b in out.bits), default=0)
    assert actual <= out.depth, (actual, out.depth)
    raw, origin = low.emit(out, arity * width)
    norm = C.normalize(raw)
    target = 3 * out.depth
    final = C.lift_outputs(norm, target) if norm.outputs else norm
    final.meta.update(program_entry=name, nominal_depth=out.depth, target_depth=target)
    source = final.meta.pop("source_of", {})
    prov = {gid: origin.get(source[gid]) or "basic" if gid in source else "buffer or constant"
            for gid in final.gates}
    return LoweredCircuit(final, width, arity, out.signed, out.depth, prov, tuple(sorted(low.moduli)))


_BASIC_ARITY = {"add": 2, "sub": 2, "div2": 1, "sg": 1, "len": 1, "smash": 2, "bit": 2, "cosg": 1,
                "proj": 1, "zero": 1, "one": 1}


def basic_to_circuit(symbol: str, width: int) -> LoweredCircuit:
    """Circuit for one basic function on ``width``-bit operands.

    Output widths: ``add`` gives ``width+1`` bits, ``sub`` a two's-complement
    word of ``width+1`` bits, ``smash`` ``2*width`` bits, ``len`` and ``bit``
    the bits of their value range, ``sg``/``cosg`` one bit.
    """
    if symbol not in _BASIC_ARITY:
        raise UnsupportedSymbol(symbol)
    a = _BASIC_ARITY[symbol]
    params = G.default_params(a)
    defs = {}
    if symbol == "cosg":
        defs["one1"] = G.basic("one1", 1, "one")
        defs["sg1"] = G.compose("sg1", 1, "sg", "id1")
        defs["id1"] = G.basic("id1", 1, "proj", 1)
        defs["cosg"] = G.compose("cosg", 1, "sub", "one1", "sg1")
    elif symbol in ("proj", "zero", "one"):
        defs[symbol] = G.FunctionDef(symbol, params, G.Basic(symbol, 1 if symbol == "proj" else None))
    else:
        defs[symbol + "_"] = G.FunctionDef(symbol + "_", params, G.Basic(symbol))
        return algebra_to_circuit(G.Program(defs, symbol + "_"), width)
    return algebra_to_circuit(G.Program(defs, symbol), width)
