"""Counting ones modulo n with a length ODE, step by step.

The counter is sampled only at the points 2^u - 1, one per bit of x, and the
step function reads the bit of x at that position.  Printing the trace shows
the running count wrapping around n.
"""

import argparse

from odealgebra import engine as G
from odealgebra import oracle
from odealgebra.stdlib import build_cmodn


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("x", type=int, nargs="?", default=0b1011_0111)
    ap.add_argument("--n", type=int, default=3)
    args = ap.parse_args()

    program = build_cmodn(args.n)
    schema = next(name for name, d in program.defs.items() if isinstance(d.body, G.Schema))
    trace = G.run_recurrence(program, schema, (args.x, args.x))

    print(f"x = {args.x} = 0b{args.x:b}, counting ones modulo {args.n}")
    for point in trace.points:
        print(f"  u={point.u:>2}  sample at {point.at:>4}  count {point.value}")
    value = G.eval_program(program, program.entry, (args.x,))
    print(f"program value {value}, popcount mod {args.n} = {oracle.popcount_mod(args.x, args.n)}")
    print(f"closed form   {G.closed_form(program, schema, (args.x, args.x))}")


if __name__ == "__main__":
    main()
