"""Wigner-von Neumann type potential with a zero-energy l2 eigenvector.

Prints the recurrence residual, partial l2 norms per decade, and the
decay exponent of the Prüfer amplitude at k = pi/2.
"""
import argparse
import math

import numpy as np

from spectral_gate import evolve
from spectral_gate.core import gen_wvn


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.75)
    ap.add_argument("--n", type=int, default=1_000_000)
    args = ap.parse_args()
    V, t = gen_wvn(args.alpha, args.n)
    psi, v = t.psi, V.values
    res = np.abs(psi[2:] + psi[:-2] + v * psi[1:-1])
    scale = np.abs(psi[2:]) + np.abs(psi[:-2]) + np.abs(v * psi[1:-1])
    print(f"max residual / (eps * scale): {np.max(res / (np.finfo(float).eps * np.maximum(scale, 1e-300))):.2f}")
    S = np.cumsum(psi[1:] ** 2)
    d = 10
    while d <= args.n:
        print(f"sum_(n<={d:>8}) psi^2 = {S[d - 1]:.12f}")
        d *= 10
    r = evolve(V, math.pi / 2, boundary=(0.0, float(psi[1])))
    print(f"log R exponent {r.r_exponent:.5f} (target {-args.alpha})")


if __name__ == "__main__":
    main()
