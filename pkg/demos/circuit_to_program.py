"""Compile a normal-form circuit into a program and check it exhaustively.

A MOD-3 counter circuit is compiled gate by gate into bounded search and
counting ODEs.  The program's value on every input is compared with direct
circuit simulation, and the program is lowered back to a circuit.
"""

from odealgebra import circuit as C
from odealgebra import fixtures
from odealgebra.xlate import circuit_to_algebra, roundtrip_check


def main():
    circuit = fixtures.mod3_counter(6)
    print(f"circuit: width {circuit.width}, {len(circuit.gates)} gates, depth {circuit.depth}")
    print(C.format_circuit(circuit))

    compiled = circuit_to_algebra(circuit)
    print(f"compiled program: {len(compiled.program.defs)} definitions, entry main(x) = assemble({compiled.y_arg}, x)")
    expected = [int(v) for v in C.eval_all(circuit)]
    got = compiled.evaluate_all()
    agree = sum(a == b for a, b in zip(expected, got))
    print(f"program agrees with the circuit on {agree}/{len(expected)} inputs")

    print(roundtrip_check(circuit).summary())


if __name__ == "__main__":
    main()
