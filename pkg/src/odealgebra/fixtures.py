"""Hand-built normal-form circuits used by tests, demos and the acceptance suite."""

from __future__ import annotations

from .circuit import AND, CONST, MOD, OR, Circuit, CircuitBuilder


def _buffers_to(cb: CircuitBuilder, g: int, from_level: int, to_level: int, modulus: int = 2) -> int:
    lv = from_level
    while lv < to_level:
        lv += 1
        kind = (MOD, OR, AND)[lv % 3]
        if kind == MOD:
            pads = [cb.gate(CONST, (), 1, lv - 1) for _ in range(modulus - 1)]
            g = cb.gate(MOD, [g, *pads], modulus, lv)
        else:
            g = cb.gate(kind, [g], None, lv)
    return g


def identity(width: int) -> Circuit:
    """Outputs equal the inputs (depth 0)."""
    cb = CircuitBuilder(width)
    outs = [cb.inp(j) for j in range(width - 1, -1, -1)]
    return cb.build(outs, name=f"identity-{width}")


def mod_count(width: int, modulus: int, bits: list[int] | None = None) -> Circuit:
    """One MOD gate over the chosen input bits: 1 iff their count is divisible by ``modulus``."""
    cb = CircuitBuilder(width)
    bits = list(range(width)) if bits is None else bits
    wires = [_buffers_to(cb, cb.inp(j), 0, 2) for j in bits]
    out = cb.gate(MOD, wires, modulus, 3)
    return cb.build([out], name=f"mod{modulus}-of-{len(bits)}")


def parity_of(width: int) -> Circuit:
    """The canonical three-layer circuit: 1 iff the number of 1 bits is even."""
    c = mod_count(width, 2)
    c.meta["name"] = f"parity-of-{width}"
    return c


def mod3_counter(width: int) -> Circuit:
    """Two outputs: count mod 3 is 0, count mod 3 is 1 (via padding)."""
    cb = CircuitBuilder(width)
    wires = [_buffers_to(cb, cb.inp(j), 0, 2) for j in range(width)]
    pad = cb.gate(CONST, (), 1, 2)
    zero = cb.gate(MOD, wires, 3, 3)
    one = cb.gate(MOD, wires + [pad, pad], 3, 3)
    return cb.build([zero, one], name=f"mod3-counter-{width}")


def and_or(width: int) -> Circuit:
    """OR of adjacent pairs, AND of those, with negated literals mixed in."""
    cb = CircuitBuilder(width)
    ors = []
    for j in range(0, width - 1, 2):
        a = cb.inp(j)
        b = cb.ninp(j + 1) if j % 4 else cb.inp(j + 1)
        ors.append(cb.gate(OR, [a, b], None, 1))
    if width % 2:
        ors.append(cb.gate(OR, [cb.inp(width - 1)], None, 1))
    top = cb.gate(AND, ors, None, 2)
    alt = cb.gate(AND, ors[: max(1, len(ors) // 2)], None, 2)
    return cb.build([top, alt], name=f"and-or-{width}")


def nested(width: int, modulus: int = 2) -> Circuit:
    """Two full OR/AND/MOD rounds: depth 6."""
    cb = CircuitBuilder(width)
    lits = [cb.inp(j) if j % 2 == 0 else cb.ninp(j) for j in range(width)]
    ors = [cb.gate(OR, [lits[j], lits[(j + 1) % width]], None, 1) for j in range(width)]
    ands = [cb.gate(AND, [ors[j], ors[(j + 2) % width]], None, 2) for j in range(width)]
    m1 = cb.gate(MOD, ands, modulus, 3)
    m2 = cb.gate(MOD, ands[: (width + 1) // 2], modulus, 3)
    o = cb.gate(OR, [m1, m2], None, 4)
    o2 = cb.gate(OR, [m2], None, 4)
    a = cb.gate(AND, [o, o2], None, 5)
    a2 = cb.gate(AND, [o], None, 5)
    out = cb.gate(MOD, [a, a2], modulus, 6)
    out2 = cb.gate(MOD, [a], modulus, 6)
    return cb.build([out, out2], name=f"nested-mod{modulus}-{width}")


def with_constants(width: int) -> Circuit:
    """Constant gates on several levels and a constant output."""
    cb = CircuitBuilder(width)
    one0 = cb.gate(CONST, (), 1, 0)
    zero0 = cb.gate(CONST, (), 0, 0)
    o1 = cb.gate(OR, [cb.inp(0), zero0], None, 1)
    o2 = cb.gate(OR, [cb.ninp(width - 1), one0], None, 1)
    a = cb.gate(AND, [o1, o2, cb.gate(CONST, (), 1, 1)], None, 2)
    m = cb.gate(MOD, [a, a, a, cb.gate(CONST, (), 1, 2)], 2, 3)
    c3 = cb.gate(CONST, (), 0, 3)
    return cb.build([m, c3], name=f"constants-{width}")


def suite() -> list[Circuit]:
    """At least ten normal-form circuits of widths 2 to 10."""
    return [
        identity(3),
        parity_of(2),
        parity_of(4),
        parity_of(10),
        mod_count(6, 3),
        mod3_counter(6),
        mod3_counter(9),
        and_or(5),
        and_or(8),
        nested(4),
        nested(7, 3),
        with_constants(4),
        mod_count(8, 2, bits=[0, 2, 2, 5, 7]),
    ]
