"""Layered Boolean circuits with AND, OR, MOD-p, MAJ and constant gates.

Conventions:

* ``Input(j)`` reads bit ``j`` of the input integer; ``NegInput(j)`` its
  complement.  Bit vectors are written most-significant first, so for
  width ``w`` the vector ``bits`` has ``bits[0]`` = bit ``w-1``.
* ``outputs`` lists output gates from bit ``m-1`` down to bit ``0``.
* ``MOD-p`` outputs 1 iff the number of 1 inputs is divisible by ``p``;
  ``MAJ`` outputs 1 iff strictly more than half of its inputs are 1.
  Empty gates: ``AND() = 1``, ``OR() = 0``, ``MOD() = 1``.

Normal form: level 0 holds input and negated-input gates, level ``3e+1``
holds OR gates, ``3e+2`` AND gates and ``3e`` (``e >= 1``) MOD gates with
one modulus per level.  Constant gates may sit on any level.  Every edge
joins consecutive levels and all outputs are on the top level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import engine as G
from .engine import Diagnostic
from .errors import MalformedCircuit, ParseError, UnsupportedGate

INPUT, NEG_INPUT, AND, OR, MOD, MAJ, CONST = "in", "nin", "and", "or", "mod", "maj", "const"
KINDS = (INPUT, NEG_INPUT, AND, OR, MOD, MAJ, CONST)
_LEAVES = (INPUT, NEG_INPUT, CONST)


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    preds: tuple[int, ...] = ()
    arg: int | None = None  # bit index, modulus or constant value

    def label(self) -> str:
        return self.kind if self.arg is None else f"{self.kind}:{self.arg}"


def gate_value(kind: str, arg: int | None, ins: Sequence[int]) -> int:
    if kind == AND:
        return int(all(ins))
    if kind == OR:
        return int(any(ins))
    if kind == MOD:
        return int(sum(ins) % arg == 0)
    if kind == MAJ:
        return int(2 * sum(ins) > len(ins))
    raise ValueError(kind)


@dataclass
class Circuit:
    width: int
    gates: dict[int, Gate]
    levels: dict[int, int]
    outputs: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.outputs = tuple(self.outputs)
        self._order: list[int] | None = None

    # structure -----------------------------------------------------------

    def check_structure(self) -> None:
        """Raise :class:`MalformedCircuit` unless the gate graph is a well-formed DAG."""
        for gid, g in self.gates.items():
            if gid != g.id:
                raise MalformedCircuit(f"gate stored under {gid} has id {g.id}")
            if g.kind not in KINDS:
                raise MalformedCircuit(f"gate {gid}: unknown kind {g.kind!r}")
            if g.kind in _LEAVES and g.preds:
                raise MalformedCircuit(f"gate {gid}: {g.kind} gates take no inputs")
            if g.kind in (INPUT, NEG_INPUT) and not (g.arg is not None and 0 <= g.arg < self.width):
                raise MalformedCircuit(f"gate {gid}: bit index {g.arg} outside width {self.width}")
            if g.kind == MOD and (g.arg is None or g.arg < 2):
                raise MalformedCircuit(f"gate {gid}: modulus {g.arg} must be at least 2")
            if g.kind == CONST and g.arg not in (0, 1):
                raise MalformedCircuit(f"gate {gid}: constant {g.arg} is not a bit")
            for p in g.preds:
                if p not in self.gates:
                    raise MalformedCircuit(f"gate {gid}: unknown predecessor {p}")
        for o in self.outputs:
            if o not in self.gates:
                raise MalformedCircuit(f"unknown output gate {o}")
        self.topological_order()

    def topological_order(self) -> list[int]:
        if self._order is not None:
            return self._order
        state: dict[int, int] = {}
        order: list[int] = []
        for root in self.gates:
            if root in state:
                continue
            stack = [(root, iter(self.gates[root].preds))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    stack.pop()
                    state[node] = 2
                    order.append(node)
                    continue
                s = state.get(nxt)
                if s == 1:
                    raise MalformedCircuit(f"cycle through gate {nxt}")
                if s is None:
                    state[nxt] = 1
                    stack.append((nxt, iter(self.gates[nxt].preds)))
        self._order = order
        return order

    @property
    def depth(self) -> int:
        return max(self.levels.values(), default=0)

    def size(self) -> int:
        return len(self.gates)

    def moduli(self) -> set[int]:
        return {g.arg for g in self.gates.values() if g.kind == MOD}

    def reachable(self) -> set[int]:
        seen: set[int] = set()
        stack = list(self.outputs)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(self.gates[n].preds)
        return seen


# -- evaluation -----------------------------------------------------------------


def bits_of(x: int, width: int) -> list[int]:
    """Most-significant-first bit vector of ``x``."""
    return [(x >> j) & 1 for j in range(width - 1, -1, -1)]


def int_of(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = 2 * v + b
    return v


def eval_circuit(c: Circuit, bits: Sequence[int]) -> list[int]:
    """Output bits (most significant first) on the input vector ``bits``."""
    if len(bits) != c.width:
        raise ValueError(f"expected {c.width} input bits, got {len(bits)}")
    c.check_structure()
    x = int_of(bits)
    val: dict[int, int] = {}
    for gid in c.topological_order():
        g = c.gates[gid]
        if g.kind == INPUT:
            val[gid] = (x >> g.arg) & 1
        elif g.kind == NEG_INPUT:
            val[gid] = 1 - ((x >> g.arg) & 1)
        elif g.kind == CONST:
            val[gid] = g.arg
        else:
            val[gid] = gate_value(g.kind, g.arg, [val[p] for p in g.preds])
    return [val[o] for o in c.outputs]


def eval_int(c: Circuit, x: int) -> int:
    if not 0 <= x < (1 << c.width):
        raise ValueError(f"{x} does not fit in {c.width} bits")
    return int_of(eval_circuit(c, bits_of(x, c.width)))


def eval_all(c: Circuit) -> np.ndarray:
    """Integer outputs on every input ``0 .. 2**width - 1`` (vectorised)."""
    c.check_structure()
    xs = np.arange(1 << c.width, dtype=np.int64)
    val: dict[int, np.ndarray] = {}
    ones = np.ones(xs.shape, dtype=np.int64)
    for gid in c.topological_order():
        g = c.gates[gid]
        if g.kind == INPUT:
            v = (xs >> g.arg) & 1
        elif g.kind == NEG_INPUT:
            v = 1 - ((xs >> g.arg) & 1)
        elif g.kind == CONST:
            v = ones * g.arg
        else:
            total = sum((val[p] for p in g.preds), np.zeros(xs.shape, dtype=np.int64))
            n = len(g.preds)
            if g.kind == AND:
                v = (total == n).astype(np.int64)
            elif g.kind == OR:
                v = (total > 0).astype(np.int64)
            elif g.kind == MOD:
                v = (total % g.arg == 0).astype(np.int64)
            else:
                v = (2 * total > n).astype(np.int64)
        val[gid] = v
    m = len(c.outputs)
    if m > 62:
        out = np.zeros(xs.shape, dtype=object)
        for o in c.outputs:
            out = out * 2 + val[o].astype(object)
        return out
    out = np.zeros(xs.shape, dtype=np.int64)
    for o in c.outputs:
        out = out * 2 + val[o]
    return out


# -- normal form ----------------------------------------------------------------


def level_kind(level: int) -> str:
    if level == 0:
        return INPUT
    return (MOD, OR, AND)[level % 3]


def _fits(kind: str, level: int) -> bool:
    if kind == CONST:
        return True
    want = level_kind(level)
    if want == INPUT:
        return kind in (INPUT, NEG_INPUT)
    return kind == want


def validate_nf(c: Circuit) -> list[Diagnostic]:
    out: list[Diagnostic] = []

    def diag(gid, code, msg):
        out.append(Diagnostic(f"gate {gid}" if gid is not None else "<circuit>", code, msg))

    try:
        c.check_structure()
    except MalformedCircuit as e:
        return [Diagnostic("<circuit>", "malformed", str(e))]
    level_mod: dict[int, int] = {}
    for gid, g in c.gates.items():
        lv = c.levels.get(gid)
        if lv is None:
            diag(gid, "level", "gate has no level")
            continue
        if g.kind == MAJ:
            diag(gid, "kind", "MAJ gates are not part of the normal form")
        elif not _fits(g.kind, lv):
            diag(gid, "kind", f"{g.label()} gate at level {lv}, which holds {level_kind(lv)} gates")
        if g.kind == MOD and lv > 0 and lv % 3 == 0:
            seen = level_mod.setdefault(lv, g.arg)
            if seen != g.arg:
                diag(gid, "modulus", f"level {lv} mixes MOD-{seen} and MOD-{g.arg} gates")
        for p in g.preds:
            plv = c.levels.get(p)
            if plv is not None and plv != lv - 1:
                diag(gid, "edge", f"edge from gate {p} at level {plv} skips to level {lv}")
    top = c.depth
    for o in c.outputs:
        if c.levels.get(o, top) != top:
            diag(o, "output", f"output gate at level {c.levels.get(o)} below the top level {top}")
    return out


class _Layout:
    """Incremental construction of a levelled circuit with buffer chains."""

    def __init__(self, width: int, default_mod: int):
        self.width = width
        self.gates: dict[int, Gate] = {}
        self.levels: dict[int, int] = {}
        self.level_mod: dict[int, int] = {}
        self.default_mod = default_mod
        self._consts: dict[tuple[int, int], int] = {}
        self._buffers: dict[tuple[int, int], int] = {}

    def new(self, kind, preds, arg, level) -> int:
        gid = len(self.gates)
        self.gates[gid] = Gate(gid, kind, tuple(preds), arg)
        self.levels[gid] = level
        if kind == MOD and level > 0:
            self.level_mod.setdefault(level, arg)
        return gid

    def const(self, bit: int, level: int) -> int:
        key = (bit, level)
        if key not in self._consts:
            self._consts[key] = self.new(CONST, (), bit, level)
        return self._consts[key]

    def lift(self, gid: int, level: int) -> int:
        """A gate computing the same value as ``gid`` at ``level``."""
        g = self.gates[gid]
        if g.kind == CONST:
            return self.const(g.arg, level)
        cur = gid
        while self.levels[cur] < level:
            nxt_level = self.levels[cur] + 1
            key = (cur, nxt_level)
            if key not in self._buffers:
                kind = level_kind(nxt_level)
                if kind == MOD:
                    p = self.level_mod.get(nxt_level, self.default_mod)
                    pads = [self.const(1, nxt_level - 1)] * (p - 1)
                    self._buffers[key] = self.new(MOD, [cur, *pads], p, nxt_level)
                else:
                    self._buffers[key] = self.new(kind, [cur], None, nxt_level)
            cur = self._buffers[key]
        return cur


def lift_outputs(c: Circuit, level: int) -> Circuit:
    """Same circuit with every output buffered up to ``level`` (at least the current depth)."""
    if validate_nf(c):
        raise MalformedCircuit("lift_outputs needs a normal-form circuit")
    lay = _Layout(c.width, min(c.moduli(), default=2))
    renum: dict[int, int] = {}
    for gid in c.topological_order():
        g = c.gates[gid]
        renum[gid] = lay.new(g.kind, [renum[p] for p in g.preds], g.arg, c.levels[gid])
    level = max(level, c.depth)
    outs = tuple(lay.lift(renum[o], level) for o in c.outputs)
    meta = dict(c.meta)
    meta["source_of"] = _compose_sources(c.meta.get("source_of"), renum)
    return Circuit(c.width, lay.gates, lay.levels, outs, meta)


def _compose_sources(previous: dict | None, renum: dict[int, int]) -> dict[int, int]:
    """Map new gate ids to the ids they came from, through an earlier mapping if any."""
    out = {}
    for old, new in renum.items():
        if previous is None:
            out[new] = old
        elif old in previous:
            out[new] = previous[old]
    return out


def normalize(c: Circuit) -> Circuit:
    """Equivalent circuit in normal form.

    Gates are placed on the lowest level of their kind above all their
    inputs (MOD gates also avoid levels already holding another modulus);
    shorter edges are stretched with single-input OR/AND buffers and
    MOD-p buffers padded with ``p-1`` constant 1 inputs.
    """
    c.check_structure()
    if not validate_nf(c):
        return c
    for g in c.gates.values():
        if g.kind == MAJ:
            raise UnsupportedGate(f"gate {g.id}: MAJ gates have no normal form here")
    default_mod = min(c.moduli(), default=2)
    lay = _Layout(c.width, default_mod)
    keep = c.reachable()
    new_id: dict[int, int] = {}
    for gid in c.topological_order():
        if gid not in keep:
            continue
        g = c.gates[gid]
        if g.kind in (INPUT, NEG_INPUT):
            new_id[gid] = lay.new(g.kind, (), g.arg, 0)
            continue
        if g.kind == CONST:
            new_id[gid] = lay.const(g.arg, 0)
            continue
        lo = 1 + max((lay.levels[new_id[p]] for p in g.preds
                      if c.gates[p].kind != CONST), default=0)
        lv = lo
        while not _fits(g.kind, lv) or (g.kind == MOD and lay.level_mod.get(lv, g.arg) != g.arg):
            lv += 1
        preds = [lay.lift(new_id[p], lv - 1) for p in g.preds]
        new_id[gid] = lay.new(g.kind, preds, g.arg, lv)
    outs = [new_id[o] for o in c.outputs]
    top = max((lay.levels[o] for o in outs if lay.gates[o].kind != CONST), default=0)
    outs = [lay.lift(o, top) for o in outs]
    meta = dict(c.meta)
    meta["source_of"] = _compose_sources(c.meta.get("source_of"), new_id)
    result = Circuit(c.width, lay.gates, lay.levels, tuple(outs), meta)
    assert not validate_nf(result), validate_nf(result)
    return result


# -- direct-connection functions ------------------------------------------------


@dataclass
class ConnFuns:
    """Gate numbering and the characteristic functions describing a circuit.

    Input gate ``j`` has number ``2j`` and its negation ``2j+1``; the gates
    of level ``e >= 1`` occupy the contiguous block ``blocks[e]``.
    """

    width: int
    depth: int
    number: dict[int, int]
    blocks: dict[int, tuple[int, int]]  # level -> [lo, hi)
    moduli: dict[int, int]
    edges: frozenset
    inputs: frozenset
    neg_inputs: frozenset
    outputs: tuple[int, ...]  # gate numbers, most significant first

    def C(self, x: int, a: int, b: int) -> int:
        return int((a, b) in self.edges)

    def L0_in(self, t: int, x: int) -> int:
        return int(t in self.inputs)

    def L0_neg(self, t: int, x: int) -> int:
        return int(t in self.neg_inputs)

    def L(self, e: int, t: int, x: int) -> int:
        lo, hi = self.blocks.get(e, (0, 0))
        return int(lo <= t < hi)

    def Out(self, j: int, t: int) -> int:
        m = len(self.outputs)
        return int(0 <= j < m and self.outputs[m - 1 - j] == t)

    def adjacency(self) -> dict[int, set[int]]:
        """Predecessor sets rebuilt purely from ``C``."""
        numbers = sorted(set(self.number.values()))
        return {b: {a for a in numbers if self.C(0, a, b)} for b in numbers}

    def defs(self, prefix: str = "conn") -> list[G.FunctionDef]:
        """The functions as table definitions for a program."""
        tab = lambda name, params, rows: G.FunctionDef(
            f"{prefix}_{name}", params, G.Table(tuple(sorted(rows))))
        out = [
            tab("C", ("x", "a", "b"), [(None, a, b) for a, b in self.edges]),
            tab("L0in", ("t", "x"), [(t, None) for t in self.inputs]),
            tab("L0neg", ("t", "x"), [(t, None) for t in self.neg_inputs]),
            tab("out", ("j", "t"), [(len(self.outputs) - 1 - i, t) for i, t in enumerate(self.outputs)]),
        ]
        for e in range(1, self.depth + 1):
            lo, hi = self.blocks.get(e, (0, 0))
            out.append(tab(f"L{e}", ("t", "x"), [(t, None) for t in range(lo, hi)]))
        return out


def make_conn_funs(c: Circuit) -> ConnFuns:
    diags = validate_nf(c)
    if diags:
        raise MalformedCircuit("; ".join(map(str, diags)))
    number: dict[int, int] = {}
    for gid, g in c.gates.items():
        if g.kind == CONST:
            raise MalformedCircuit(f"gate {gid}: constant gates have no number")
        if g.kind == INPUT:
            number[gid] = 2 * g.arg
        elif g.kind == NEG_INPUT:
            number[gid] = 2 * g.arg + 1
    nxt = 2 * c.width
    blocks: dict[int, tuple[int, int]] = {}
    moduli: dict[int, int] = {}
    for e in range(1, c.depth + 1):
        at = sorted(gid for gid, lv in c.levels.items() if lv == e)
        blocks[e] = (nxt, nxt + len(at))
        for gid in at:
            number[gid] = nxt
            nxt += 1
            if c.gates[gid].kind == MOD:
                moduli[e] = c.gates[gid].arg
    edges = frozenset((number[p], number[gid]) for gid, g in c.gates.items() for p in g.preds)
    return ConnFuns(
        width=c.width,
        depth=c.depth,
        number=number,
        blocks=blocks,
        moduli=moduli,
        edges=edges,
        inputs=frozenset(number[g] for g, v in c.gates.items() if v.kind == INPUT),
        neg_inputs=frozenset(number[g] for g, v in c.gates.items() if v.kind == NEG_INPUT),
        outputs=tuple(number[o] for o in c.outputs),
    )


# -- text format ----------------------------------------------------------------

HEADER = "circuit-format 1"


def format_circuit(c: Circuit) -> str:
    lines = [HEADER, ("width %d outputs %s" % (c.width, " ".join(map(str, c.outputs)))).rstrip()]
    for gid in sorted(c.gates):
        g = c.gates[gid]
        lv = c.levels.get(gid)
        fields = [str(gid), "-" if lv is None else str(lv), g.label(), *map(str, g.preds)]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != HEADER:
        raise ParseError(f"missing header line {HEADER!r}")
    if len(lines) < 2:
        raise ParseError("missing 'width W outputs ...' line")
    head = lines[1].split()
    if len(head) < 3 or head[0] != "width" or head[2] != "outputs":
        raise ParseError("expected 'width W outputs ...'")
    try:
        width = int(head[1])
        outputs = tuple(int(t) for t in head[3:])
    except ValueError as e:
        raise ParseError(str(e)) from None
    gates: dict[int, Gate] = {}
    levels: dict[int, int] = {}
    for ln in lines[2:]:
        parts = ln.split()
        if len(parts) < 3:
            raise ParseError(f"gate line needs 'id level kind': {ln!r}")
        try:
            gid = int(parts[0])
            kind, _, arg = parts[2].partition(":")
            preds = tuple(int(p) for p in parts[3:])
            argv = int(arg) if arg else None
        except ValueError as e:
            raise ParseError(f"{ln!r}: {e}") from None
        if kind not in KINDS:
            raise ParseError(f"unknown gate kind {kind!r}")
        if gid in gates:
            raise ParseError(f"duplicate gate id {gid}")
        gates[gid] = Gate(gid, kind, preds, argv)
        if parts[1] != "-":
            try:
                levels[gid] = int(parts[1])
            except ValueError:
                raise ParseError(f"bad level {parts[1]!r}") from None
    c = Circuit(width, gates, levels, outputs)
    c.check_structure()
    return c


# -- construction helpers -----------------------------------------------------


class CircuitBuilder:
    """Convenience for writing circuits by hand."""

    def __init__(self, width: int):
        self.width = width
        self.gates: dict[int, Gate] = {}
        self.levels: dict[int, int] = {}

    def gate(self, kind: str, preds: Iterable[int] = (), arg: int | None = None, level: int | None = None) -> int:
        gid = len(self.gates)
        self.gates[gid] = Gate(gid, kind, tuple(preds), arg)
        if level is not None:
            self.levels[gid] = level
        return gid

    def inp(self, j: int, level: int | None = 0) -> int:
        return self.gate(INPUT, (), j, level)

    def ninp(self, j: int, level: int | None = 0) -> int:
        return self.gate(NEG_INPUT, (), j, level)

    def build(self, outputs: Sequence[int], **meta) -> Circuit:
        c = Circuit(self.width, dict(self.gates), dict(self.levels), tuple(outputs), meta)
        c.check_structure()
        return c
