"""Scan of the Example 2 contraction factor b^2 over (lambda, L).

Writes ``b_squared.csv`` with columns lambda, L, b_squared on a 100 x 100
grid (lambda linear in [-50, 0.25], L logarithmic in [1e-4, 10]) and prints
the maximum.

Run:  python scripts/b_squared_scan.py --out results/scan
"""

import argparse
from pathlib import Path

import numpy as np

from whiter.oracles import example2_b_squared


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/scan")
    ap.add_argument("--n", type=int, default=100)
    args = ap.parse_args()
    lam = np.linspace(-50, 0.25, args.n)
    L = np.geomspace(1e-4, 10, args.n)
    b2 = example2_b_squared(lam[:, None], L[None, :])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ll, LL = np.meshgrid(lam, L, indexing="ij")
    table = np.column_stack([ll.ravel(), LL.ravel(), b2.ravel()])
    np.savetxt(out / "b_squared.csv", table, delimiter=",", header="lambda,L,b_squared", comments="", fmt="%.17g")
    i, j = np.unravel_index(b2.argmax(), b2.shape)
    print(f"max b^2 = {b2.max():.6f} at lambda = {lam[i]:.4g}, L = {L[j]:.3g}")


if __name__ == "__main__":
    main()
