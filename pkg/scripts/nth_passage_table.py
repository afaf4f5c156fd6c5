"""Finite mass and atom at infinity of tau_n for several slopes.

    python3 scripts/nth_passage_table.py --nmax 5
"""

import argparse

import numpy as np

from passage_lab.linear import PassageProblem
from passage_lab.successive import nth_passage_law, t2_defect


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nmax", type=int, default=4)
    ap.add_argument("--slopes", type=float, nargs="+", default=[0.0, -0.1, -0.5, -1.0])
    args = ap.parse_args()
    grid = np.geomspace(0.05, 50.0, 64)
    print("b        n   finite mass   atom at inf   peak of f_tau_n")
    for b in args.slopes:
        p = PassageProblem(0.0, 1.0, b)
        for n in range(1, args.nmax + 1):
            law = nth_passage_law(p, n, grid)
            print(f"{b:+.2f}  {n:3d}   {law.finite_mass():11.6f}   {law.atom_at_infinity:11.6f}   {law.density.values.max():.4f}")
        if b != 0:
            print(f"       exact P(T2 = inf) = {t2_defect(p):.6f}")


if __name__ == "__main__":
    main()
