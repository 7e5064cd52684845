"""Circuit -> program -> circuit, compared exhaustively."""

from __future__ import annotations

from dataclasses import dataclass

from .. import circuit as C
from .forward import circuit_to_algebra
from .lower import algebra_to_circuit


@dataclass(frozen=True)
class RoundtripReport:
    width: int
    inputs: int
    circuit_vs_program: int  # number of agreeing inputs
    circuit_vs_lowered: int
    program_vs_lowered: int
    counterexample: tuple | None  # (x, circuit, program, lowered)
    lowered_depth: int
    lowered_size: int

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def summary(self) -> str:
        n = self.inputs
        status = "agree" if self.ok else f"MISMATCH at {self.counterexample}"
        return (f"width {self.width}: circuit/program {self.circuit_vs_program}/{n}, "
                f"circuit/lowered {self.circuit_vs_lowered}/{n}, "
                f"program/lowered {self.program_vs_lowered}/{n}: {status}")


def roundtrip_check(c: C.Circuit, max_width: int = 10) -> RoundtripReport:
    if c.width > max_width:
        raise ValueError(f"exhaustive round trip is limited to width {max_width}")
    compiled = circuit_to_algebra(c)
    lowered = algebra_to_circuit(compiled.program, c.width)
    direct = [int(v) for v in C.eval_all(c)]
    via_program = compiled.evaluate_all()
    relowered = lowered.evaluate_all()
    first = None
    for x, (a, b, r) in enumerate(zip(direct, via_program, relowered)):
        if not a == b == r:
            first = (x, a, b, r)
            break
    agree = lambda u, v: sum(1 for s, t in zip(u, v) if s == t)
    return RoundtripReport(
        width=c.width,
        inputs=len(direct),
        circuit_vs_program=agree(direct, via_program),
        circuit_vs_lowered=agree(direct, relowered),
        program_vs_lowered=agree(via_program, relowered),
        counterexample=first,
        lowered_depth=lowered.circuit.depth,
        lowered_size=lowered.circuit.size(),
    )
