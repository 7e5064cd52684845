"""Rewrite a toggling ODE as recursion on notation with a 1-bit step.

Parity of the ones in x is computed twice: by the toggling ODE, and by the
rewritten program that reads x digit by digit.  The two agree everywhere.
"""

from odealgebra import engine as G
from odealgebra.stdlib import build_cmod2, eval_kbrn, twoode_to_onebrn


def main():
    source = build_cmod2()
    rewritten = twoode_to_onebrn(source, "toggle_parity")
    print("rewritten definitions:")
    for name in sorted(set(rewritten.defs) - set(source.defs)):
        print(f"  {name}: {type(rewritten.defs[name].body).__name__}")
    a, b = source.evaluator(), rewritten.evaluator()
    limit = 1 << 12
    agree = sum(a("toggle_parity", x, x) == b("toggle_parity_brn", x, x) for x in range(limit))
    print(f"toggling ODE and notation recursion agree on {agree}/{limit} inputs")
    print(f"x = 0b110101: ODE {a('toggle_parity', 53, 53)}, "
          f"notation {eval_kbrn(rewritten, 'toggle_parity_brn', 53, 53)}")


if __name__ == "__main__":
    main()
