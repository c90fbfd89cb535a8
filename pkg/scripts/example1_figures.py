"""Data series behind the Example 1 profile and error-decay plots.

For each (lambda, L) case writes, on the line Im(alpha) = 0:

* ``profiles.csv``: alpha, exact Phi_-^(L), and the iterates 0, 1, 2
  (real and imaginary parts, |Re alpha| <= window);
* ``decay.csv``: n, L2 and max norms of Phi_-^(L) - Phi_-^(L)n, the increment
  ratio and the |b|^2 reference rate.

Run:  python scripts/example1_figures.py --out results/example1
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from whiter import examples as ex
from whiter.analytic_core import LineSamples, norm_on_line
from whiter.oracles import Example1Params, example1_exact
from whiter.whsolver import coupling_E, initial_phi, phi_from_E, reduce, solve

CASES = {"fast": (0.7 + 10j, 1.0), "slow": (0.2, 2.0)}


def run_case(lam, L, iters, window):
    p = Example1Params(lam, L)
    opts = ex.example1_options(p, max_iter=iters, stop_tol=1e-14)
    sys_ = reduce(ex.example1_problem(p), opts)
    _, rep = solve(sys_, opts)
    phis = [initial_phi(sys_, "out").boundary]
    phis += [phi_from_E(sys_, coupling_E(sys_, psi), "out").boundary for psi in rep.psi_iterates]
    grid = phis[0].grid
    exact = example1_exact(p).phiL(grid.points)

    keep = np.abs(grid.x) <= window
    profiles = {"alpha": grid.x[keep], "exact": exact[keep]}
    for n in range(min(3, len(phis))):
        profiles[f"iter{n}"] = phis[n].values[keep]

    decay = []
    prev_inc = None
    for n, f in enumerate(phis):
        err = LineSamples(grid, f.values - exact)
        inc = norm_on_line(f - phis[n - 1]) if n else None
        ratio = inc / prev_inc if inc is not None and prev_inc else None
        decay.append({"n": n, "l2_error": norm_on_line(err), "max_error": err.max_abs(),
                      "increment_ratio": ratio, "b_squared": abs(np.exp(-complex(lam) * L)) ** 2})
        prev_inc = inc
    return profiles, decay


def write_profiles(path: Path, profiles):
    cols = [k for k in profiles if k != "alpha"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_re"] + [f"{c}_{part}" for c in cols for part in ("re", "im")])
        for i, a in enumerate(profiles["alpha"]):
            row = [f"{a:.17g}"]
            for c in cols:
                v = profiles[c][i]
                row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
            w.writerow(row)


def write_decay(path: Path, rows):
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: "" if v is None else f"{v:.17g}" for k, v in r.items()})


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/example1")
    ap.add_argument("--iters", type=int, default=12)
    ap.add_argument("--window", type=float, default=20.0)
    args = ap.parse_args()
    for name, (lam, L) in CASES.items():
        out = Path(args.out) / name
        out.mkdir(parents=True, exist_ok=True)
        profiles, decay = run_case(lam, L, args.iters, args.window)
        write_profiles(out / "profiles.csv", profiles)
        write_decay(out / "decay.csv", decay)
        print(f"lambda={lam}, L={L}: {len(decay) - 1} iterations, final L2 error {decay[-1]['l2_error']:.2e}")


if __name__ == "__main__":
    main()
