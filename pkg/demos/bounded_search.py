"""Sharply bounded search: exists, forall and least witness below len(x).

The predicate is a small table relation R(z, y).  Each search runs as a
length ODE over z < len(x), and the results are compared against brute force.
"""

from odealgebra import engine as G
from odealgebra import oracle
from odealgebra.stdlib import build_sb_exists, build_sb_forall, build_sb_mu


def main():
    witnesses = (3, 5)
    rdef = G.FunctionDef("R", ("z", "y"), G.Table(tuple((z, None) for z in witnesses)))
    ex, fa, mu = (build(rdef).evaluator() for build in (build_sb_exists, build_sb_forall, build_sb_mu))
    pred = lambda z: int(z in witnesses)

    print(f"R(z, y) holds for z in {witnesses}")
    print("   x  len  exists  forall  mu")
    for x in (0, 1, 7, 15, 31, 63, 255):
        bound = oracle.bit_length(x)
        row = (ex("R_exists", x, 0), fa("R_forall", x, 0), mu("R_mu", x, 0))
        assert row == (oracle.brute_exists(pred, bound), oracle.brute_forall(pred, bound), oracle.brute_mu(pred, bound))
        print(f"{x:>4}  {bound:>3}  {row[0]:>6}  {row[1]:>6}  {row[2]:>3}")
    print("mu reports len(x) + 1 when no witness exists below the bound")


if __name__ == "__main__":
    main()
