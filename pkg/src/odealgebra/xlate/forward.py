"""Circuit to algebra: the level-by-level ``Eval`` construction.

For a normal-form circuit the compiled program defines, for every level
``e``, a function ``eval_L<e>(t, x)`` giving the value of the gate numbered
``t`` on input ``x`` (0 when ``t`` is not a gate of that level):

* level 0 reads ``BIT(t div 2, x)`` or its complement;
* OR levels take the bounded maximum over predecessors;
* AND levels take the bounded minimum over predecessors;
* MOD-p levels count the 1-valued predecessors with a counting ODE and
  test the count for zero.

Predecessor searches run over the block of gate numbers of the previous
level with a doubling ODE whose recursion argument is a constant of the
right length.  A final doubling ODE ``assemble(y, x)`` appends the output
bits from the most significant one down; ``main(x)`` calls it with
``y = 2**(m-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import circuit as C
from .. import engine as G
from ..errors import MixedModuli, NotNormalForm
from ..stdlib import Builder, bit_stream_into, bounded_max_into, bounded_min_into


@dataclass
class CompiledProgram:
    program: G.Program
    width: int
    outputs: int
    y_arg: int  # first argument of ``assemble`` that yields all outputs
    provenance: dict[str, str] = field(default_factory=dict)
    conn: C.ConnFuns | None = None

    def evaluator(self) -> G.Evaluator:
        return G.Evaluator(self.program, memo="call")

    def evaluate(self, x: int, evaluator: G.Evaluator | None = None) -> int:
        ev = evaluator or self.evaluator()
        return ev("main", x)

    def evaluate_all(self) -> list[int]:
        ev = self.evaluator()
        return [ev("main", x) for x in range(1 << self.width)]


def _const_gadgets(width: int, modulus: int):
    """Gate factories producing constant 0/1 at a given level without constant gates."""

    def make(lay: dict, level: int, bit: int, new) -> int:
        key = (level, bit)
        if key in lay:
            return lay[key]
        kind = C.level_kind(level)
        if kind == C.OR:
            if bit == 0:
                gid = new(C.OR, (), None, level)
            elif level == 1:
                gid = new(C.OR, (lay["x0"], lay["nx0"]), None, level)
            else:
                gid = new(C.OR, (make(lay, level - 1, 1, new),), None, level)
        elif kind == C.AND:
            if bit == 1:
                gid = new(C.AND, (), None, level)
            else:
                gid = new(C.AND, (make(lay, level - 1, 0, new),), None, level)
        else:
            if bit == 1:
                gid = new(C.MOD, (), modulus, level)
            else:
                gid = new(C.MOD, (make(lay, level - 1, 1, new),), modulus, level)
        lay[key] = gid
        return gid

    return make


def prepare(c: C.Circuit) -> C.Circuit:
    """Equivalent normal-form circuit without constant gates or repeated MOD inputs."""
    diags = C.validate_nf(c)
    if diags:
        raise NotNormalForm("; ".join(map(str, diags)))
    mods = c.moduli()
    if len(mods) > 1:
        raise MixedModuli(f"MOD levels use several moduli {sorted(mods)}")
    modulus = next(iter(mods), 2)
    if c.width < 1:
        raise NotNormalForm("the construction needs at least one input bit")

    gates: dict[int, C.Gate] = {}
    levels: dict[int, int] = {}

    def new(kind, preds, arg, level):
        gid = len(gates)
        gates[gid] = C.Gate(gid, kind, tuple(preds), arg)
        levels[gid] = level
        return gid

    lay: dict = {"x0": new(C.INPUT, (), 0, 0), "nx0": new(C.NEG_INPUT, (), 0, 0)}
    gadget = _const_gadgets(c.width, modulus)
    renum: dict[int, int] = {}
    outputs = list(c.outputs)
    top = c.depth
    lift_outputs = top == 0 and any(c.gates[o].kind == C.CONST for o in outputs)

    for gid in c.topological_order():
        g, lv = c.gates[gid], c.levels[gid]
        if g.kind == C.CONST:
            if lv > 0:
                renum[gid] = gadget(lay, lv, g.arg, new)
            continue
        if g.kind in (C.INPUT, C.NEG_INPUT):
            renum[gid] = new(g.kind, (), g.arg, 0)
            continue
        preds: list[int] = []
        for p in g.preds:
            pg = c.gates[p]
            if pg.kind == C.CONST and c.levels[p] == 0:
                # only OR gates read level 0: a 0 input is inert, a 1 input makes the gate true
                if pg.arg == 1:
                    preds += [lay["x0"], lay["nx0"]]
                continue
            preds.append(renum[p])
        if g.kind == C.MOD:
            counts: dict[int, int] = {}
            for p in preds:
                counts[p] = counts.get(p, 0) + 1
            preds = []
            for p, r in counts.items():
                r %= g.arg
                if r == 0:
                    continue
                preds.append(p)
                for _ in range(r - 1):
                    src = gates[p]
                    preds.append(new(src.kind, src.preds, src.arg, levels[p]))
        else:
            preds = list(dict.fromkeys(preds))
        renum[gid] = new(g.kind, preds, g.arg, lv)

    new_outputs = []
    for o in outputs:
        g = c.gates[o]
        if lift_outputs:
            if g.kind == C.CONST:
                preds = (lay["x0"], lay["nx0"]) if g.arg == 1 else ()
            else:
                preds = (renum[o],)
            new_outputs.append(new(C.OR, preds, None, 1))
        elif g.kind == C.CONST:
            new_outputs.append(renum[o] if o in renum else gadget(lay, top, g.arg, new))
        else:
            new_outputs.append(renum[o])
    out = C.Circuit(c.width, gates, levels, tuple(new_outputs), dict(c.meta))
    assert not C.validate_nf(out), C.validate_nf(out)
    return out


def circuit_to_algebra(c: C.Circuit, k_exp: int | None = None) -> CompiledProgram:
    """Compile a normal-form circuit into a program over the basic functions and its tables.

    ``k_exp`` is accepted for symmetry with the polynomial bound of the
    construction; the search ranges are the exact gate-number blocks of
    the given circuit, so it is not needed.
    """
    prep = prepare(c)
    conn = C.make_conn_funs(prep)
    b = Builder()
    prov: dict[str, str] = {}
    for d in conn.defs():
        b.add(d)
        prov[d.name] = "circuit description table"

    t1, x1 = b.proj(2, 1), b.proj(2, 2)
    # level 0: BIT(t div 2, x) for input gates, its complement for negated ones
    bitx = b.comp("bit", b.comp("div2", t1), x1, name="input_bit")
    ev0 = b.or_(b.and_(b.at("conn_L0in", 2, 1, 2), bitx),
                b.and_(b.at("conn_L0neg", 2, 1, 2), b.cosg(bitx)), name="eval_L0")
    prov[ev0] = "level 0: input and negated input gates"

    def block(e):
        if e == 0:
            return 0, 2 * prep.width
        return conn.blocks.get(e, (0, 0))

    def search_parts(prev_eval, lo):
        # g(z, t, x) = eval_prev(lo + z, x), h(z, t, x) = C(x, lo + z, t)
        idx = b.comp("add", b.proj(3, 1), b.const(3, lo))
        g = b.comp(prev_eval, idx, b.proj(3, 3))
        h = b.comp("conn_C", b.proj(3, 3), idx, b.proj(3, 2))
        return g, h

    def at_bound(f, size):
        # (t, x) -> f(W, t, x) with len(W) = size
        w = b.const(2, (1 << (size - 1)) if size else 0)
        return b.comp(f, w, t1, x1)

    evals = [ev0]
    for e in range(1, prep.depth + 1):
        lo, hi = block(e - 1)
        g, h = search_parts(evals[-1], lo)
        kind = C.level_kind(e)
        here = b.at(f"conn_L{e}", 2, 1, 2)
        if kind == C.OR:
            val = at_bound(bounded_max_into(b, g, h), hi - lo)
            what = "OR level: bounded maximum over predecessors"
        elif kind == C.AND:
            val = at_bound(bounded_min_into(b, g, h), hi - lo)
            what = "AND level: bounded minimum over predecessors"
        else:
            p = conn.moduli.get(e, 2)
            counter = G.Length2ODE() if p == 2 else G.LengthNODE(p)
            cnt = bit_stream_into(b, b.and_(h, g), kind=counter, name=f"count_L{e}")
            val = b.cosg(at_bound(cnt, hi - lo))
            what = f"MOD-{p} level: count of 1-valued predecessors modulo {p}, tested for zero"
        ev = b.and_(here, val, name=f"eval_L{e}")
        prov[ev] = what
        evals.append(ev)

    # output j (bit j of the result) is the gate numbered t with out(j, t)
    lo, hi = block(prep.depth)
    idx = b.comp("add", b.proj(3, 1), b.const(3, lo))
    g = b.comp(evals[-1], idx, b.proj(3, 3))
    h = b.comp("conn_out", b.proj(3, 2), idx)
    out_bit = b.define(2, G.Compose(bounded_max_into(b, g, h),
                                    (b.const(2, (1 << (hi - lo - 1)) if hi > lo else 0), t1, x1)),
                       name="output_bit")
    prov[out_bit] = "value of output bit j"

    m = len(prep.outputs)
    # assemble(y, x): doubling ODE appending output bit m-1-len(y) at each length step
    y2, x2 = b.proj(2, 1), b.proj(2, 2)
    j = b.comp("sub", b.const(2, max(m - 1, 0)), b.comp("len", y2), name="output_index")
    k = b.comp(out_bit, j, x2, name="assemble_step")
    asm = b.schema(G.LengthODE1(), b.zero(1), k, name="assemble")
    prov[asm] = "appends the output bits, most significant first"
    y_arg = (1 << (m - 1)) if m else 0
    main = b.comp(asm, b.const(1, y_arg), b.proj(1, 1), name="main")
    prov[main] = f"entry: assemble({y_arg}, x)"
    program = b.program("main")
    diags = G.validate(program)
    assert not diags, diags
    return CompiledProgram(program, c.width, m, y_arg, prov, conn)
