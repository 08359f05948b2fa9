"""Pointwise-sharp potentials: one bump at site n, certified, and pushed over the edge.

For n = 1..N_MAX checks that |V(n)| sqrt(n/2) = 1 and that adding ``--eps``
to V(n) produces a violation, reporting the index where it appears.
"""
import argparse
import math
import time

from spectral_gate import certify
from spectral_gate.core import Potential, gen_extremal


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=50)
    ap.add_argument("--eps", type=float, default=1e-6)
    ap.add_argument("--horizon", type=int, default=1_000_000)
    args = ap.parse_args()
    t = time.perf_counter()
    for n in range(1, args.max_n + 1):
        V = gen_extremal(n, args.horizon)
        base = certify(V)
        ratio = abs(V.at(n)) * math.sqrt(n / 2.0)
        v = V.values.copy()
        v[n - 1] += args.eps
        bumped = certify(Potential(v))
        print(f"n={n:3d} base={base.status:<10} |V(n)|sqrt(n/2)={ratio:.15f} "
              f"bumped={bumped.status:<10} index={bumped.index}")
    print(f"elapsed {time.perf_counter() - t:.2f}s")


if __name__ == "__main__":
    main()
