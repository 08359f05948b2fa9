"""Scan the alternating family lam (-1)^n / n across the certification threshold.

For each lam prints the certification status, the violation index, and the
smallest truncation with an eigenvalue outside [-2, 2].
"""
import argparse

import numpy as np

from spectral_gate import certify, first_outside_truncation
from spectral_gate.core import gen_alternating


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lo", type=float, default=0.8)
    ap.add_argument("--hi", type=float, default=1.5)
    ap.add_argument("--steps", type=int, default=15)
    ap.add_argument("--n", type=int, default=100_000)
    args = ap.parse_args()
    print(f"{'lam':>8} {'status':>10} {'index':>8} {'first_outside_N':>16}")
    for lam in np.linspace(args.lo, args.hi, args.steps):
        r = certify(gen_alternating(float(lam), args.n))
        first = first_outside_truncation(gen_alternating(float(lam), min(args.n, 5000)))
        idx = "-" if r.index is None else r.index
        print(f"{lam:8.4f} {r.status:>10} {idx!s:>8} {first!s:>16}")


if __name__ == "__main__":
    main()
