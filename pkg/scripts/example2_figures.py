"""Data series for Example 2.

* ``profiles.csv`` (lambda = -15, L = 0.04): exact U_+^(1) and its iterates
  0 and 1 on the output line, |Re alpha| <= window.
* ``errors.csv`` (lambda = 0.1, L = 1e-4): max error of U_+^(1)n and
  U_-^(2)n against the exact solution, with the computed and closed-form
  constants C1^(n), C2^(n).

Run:  python scripts/example2_figures.py --out results/example2
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from whiter import examples as ex
from whiter.analytic_core import LineSamples
from whiter.oracles import Example2Params, example2_exact, example2_iterates
from whiter.whsolver import solve_coupled


def iterates(p, iters):
    pipe = ex.example2_pipeline(p)
    rep = solve_coupled(pipe.system, max_iter=iters, stop_tol=1e-14)
    zero = LineSamples.zeros(rep.P1[0].grid)
    U1 = [pipe.U1_plus(rep.P1[n], rep.P2[n - 1] if n else zero) for n in range(rep.iterations + 1)]
    U2 = [pipe.U2_minus(rep.P1[n], rep.P2[n]) for n in range(rep.iterations + 1)]
    consts = [pipe.constants(a, b) for a, b in zip(rep.P1, rep.P2)]
    return U1, U2, consts


def profiles(out: Path, window: float):
    p = Example2Params(-15.0, 0.04)
    U1, _, _ = iterates(p, 1)
    grid = U1[0].grid
    exact = example2_exact(p).U1_plus(grid.points)
    keep = np.abs(grid.x) <= window
    with (out / "profiles.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_re", "exact_re", "exact_im", "iter0_re", "iter0_im", "iter1_re", "iter1_im"])
        for i in np.flatnonzero(keep):
            row = [grid.x[i]]
            for v in (exact[i], U1[0].values[i], U1[1].values[i]):
                row += [v.real, v.imag]
            w.writerow([f"{x:.17g}" for x in row])


def errors(out: Path, iters: int):
    p = Example2Params(0.1, 1e-4)
    U1, U2, consts = iterates(p, iters)
    exact = example2_exact(p)
    z = U1[0].grid.points
    ref = example2_iterates(p, len(consts) - 1)
    fields = ["n", "U1_plus_max_error", "U2_minus_max_error", "C1_re", "C1_im", "C2_re", "C2_im",
              "C1_oracle", "C2_oracle"]
    with (out / "errors.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for n, (u1, u2, (c1, c2), (r1, r2)) in enumerate(zip(U1, U2, consts, ref)):
            e1 = np.abs(u1.values - exact.U1_plus(z)).max()
            e2 = np.abs(u2.values - exact.U2_minus(z)).max()
            w.writerow([n] + [f"{x:.17g}" for x in (e1, e2, c1.real, c1.imag, c2.real, c2.imag,
                                                      complex(r1).real, complex(r2).real)])
            print(f"n={n}: max error U1+ {e1:.2e}, U2- {e2:.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/example2")
    ap.add_argument("--iters", type=int, default=6)
    ap.add_argument("--window", type=float, default=20.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    profiles(out, args.window)
    errors(out, args.iters)


if __name__ == "__main__":
    main()
