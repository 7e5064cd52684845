"""Lower the same program at growing input widths.

Gate count grows with the width while depth stays fixed: every construct is
assigned a constant number of levels, so the circuit family has constant
depth, as expected for programs in this fragment.
"""

from odealgebra.stdlib import build_cmodn
from odealgebra.xlate import algebra_to_circuit


def main():
    for n in (2, 3, 5):
        program = build_cmodn(n)
        ev = program.evaluator()
        print(f"popcount mod {n}")
        for width in (4, 6, 8, 10, 12):
            low = algebra_to_circuit(program, width)
            ok = low.evaluate_all() == [ev(program.entry, x) for x in range(1 << width)]
            print(f"  width {width:>2}: {len(low.circuit.gates):>5} gates, depth {low.circuit.depth}, "
                  f"moduli {sorted(low.moduli)}, {'exact' if ok else 'WRONG'}")


if __name__ == "__main__":
    main()
