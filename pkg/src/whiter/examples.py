"""The two worked examples wired through the numerical pipeline.

Nothing here uses the closed forms of :mod:`whiter.oracles` except to name the
symbols; every split and factorisation is computed numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic_core import (
    DEFAULT_HALF_WIDTH,
    DEFAULT_N_POINTS,
    LineGrid,
    LineSamples,
    Strip,
    exp_factor,
    sample,
)
from .errors import ConfigError
from .oracles import Example1Params, Example2Params
from .splitting import additive_split, multiplicative_split
from .whsolver import (
    CoupledSystem,
    ProblemSpec,
    ReducedSystem,
    SolverOptions,
    coupling_D,
    coupling_E,
    fit_pole_coefficient,
)

# grid spacing needed for ~1e-11 accuracy at distance d from the nearest
# singularity is about pi*d/26
_RESOLUTION = math.pi / 26


def auto_grid(clearance: float, half_width: float = DEFAULT_HALF_WIDTH, floor: int = DEFAULT_N_POINTS,
              cap: int = 2**17) -> tuple[float, int]:
    """Smallest power-of-two grid resolving singularities ``clearance`` away."""
    n = floor
    while 2 * half_width / n > _RESOLUTION * clearance and n < cap:
        n *= 2
    if 2 * half_width / n > _RESOLUTION * clearance and half_width > 50:
        half_width /= 2
    return half_width, n


# --------------------------------------------------------------------------
# Example 1


def example1_problem(p: Example1Params) -> ProblemSpec:
    """Example 1 in the form of the full system with ``B = C = 1``.

    With those choices ``K1 = K3 = A``, ``f4 = f1`` and ``f3 = A f2 - exp(-i alpha L) f1``,
    so the forcings are chosen to give ``f3 = f4 = 1/(alpha - i) - 1/(alpha + 2i)``.
    """
    lam, L = complex(p.lam), float(p.L)

    def A(z):
        return 0.5 / ((z - 1j * lam) * (z + 1j * lam)) + 1.0

    def g(z):
        return 1.0 / (z - 1j) - 1.0 / (z + 2j)

    def f2(z):
        return (g(z) + np.exp(-1j * z * L) * g(z)) / A(z)

    r = lam.real
    return ProblemSpec(A, np.ones_like, np.ones_like, g, f2, L, Strip(-r, r))


def example1_options(p: Example1Params, **overrides) -> SolverOptions:
    r = complex(p.lam).real
    half, n = auto_grid(r / 2)
    kw = dict(line_a=-r / 2, line_b=r / 2, half_width=half, n_points=n)
    kw.update(overrides)
    return SolverOptions(**kw)


def example1_constants(sys: ReducedSystem, phi_iterates, psi_iterates, lam) -> list[tuple[complex, complex]]:
    """Recover ``(k1^(m), k2^(m))`` from computed iterates by residue fitting.

    ``(K1 Phi^m)^+ = k2^(m) / (alpha + i lam)`` and
    ``(K1 Psi^(m+1))^- = k1^(m) / (alpha - i lam)``.
    """
    lam = complex(lam)
    out = []
    for m, psi in enumerate(psi_iterates):
        k2 = fit_pole_coefficient(coupling_D(sys, phi_iterates[m]).boundary, -1j * lam)
        k1 = fit_pole_coefficient(coupling_E(sys, psi).boundary, 1j * lam)
        out.append((k1, k2))
    return out


# --------------------------------------------------------------------------
# Example 2


def _example2_symbols(p: Example2Params):
    lam, L = float(p.lam), float(p.L)
    lam0 = math.sqrt(1 - 2 * lam)
    lam1 = math.sqrt(1 - 4 * lam)

    def M(z):
        return (z - 1j * lam1) * (z + 1j * lam0) / ((z - 1j * lam0) * (z + 1j * lam1))

    def K(z):
        return (z - 1j * lam0) * (z + 1j) / ((z - 1j) * (z + 1j * lam0))

    def L1(z):
        return (z - 1j) / ((z - 1j * lam0) * (z - 2j))

    def L2(z):
        return 2 * lam * np.exp(-1j * z * L) / ((z - 2j) * (z + 1j * lam0) * (z - 1j * lam1))

    return lam, L, lam0, lam1, M, K, L1, L2


@dataclass(frozen=True)
class Example2Pipeline:
    """Numerical ingredients of Example 2 on the lines ``a``, ``b`` and the output line."""

    params: Example2Params
    lam0: float
    system: CoupledSystem
    K_plus: LineSamples
    M_minus: LineSamples
    L1_plus: LineSamples
    L1_minus: LineSamples
    L2_plus: LineSamples
    L2_minus: LineSamples

    def U1_plus(self, P1: LineSamples, P2_prev: LineSamples) -> LineSamples:
        s = self.system
        g = P1.grid
        return self.K_plus * (self.L1_plus + P1 + exp_factor(g, s.L) * s.R2["out"] * (self.L2_plus + P2_prev))

    def U2_minus(self, P1: LineSamples, P2: LineSamples) -> LineSamples:
        s = self.system
        g = P1.grid
        return self.M_minus * (self.L2_minus + P2 + exp_factor(g, -s.L) * s.R1["out"] * (self.L1_minus + P1))

    def constants(self, P1: LineSamples, P2: LineSamples) -> tuple[complex, complex]:
        return (fit_pole_coefficient(P1, 1j * self.lam0), fit_pole_coefficient(P2, -1j * self.lam0))


def example2_pipeline(p: Example2Params, line_a=None, line_b=None, half_width=None, n_points=None,
                      out: float = 0.0) -> Example2Pipeline:
    lam, L, lam0, lam1, M, K, L1, L2 = _example2_symbols(p)
    edge = min(lam1, 1.0)
    if edge <= 0:
        raise ConfigError("Example 2 needs lambda < 0.25 for a nonempty strip")
    a = -edge / 2 if line_a is None else line_a
    b = edge / 2 if line_b is None else line_b
    if not (-edge < a < 0 < b < edge):
        raise ConfigError(f"working lines must lie inside |Im alpha| < {edge}")
    hw, n = auto_grid(min(-a, b, edge + a, edge - b))
    hw = hw if half_width is None else half_width
    n = n if n_points is None else n_points
    base = LineGrid(0.0, hw, n)

    def pieces(c):
        g = base.at(c)
        mf = multiplicative_split(sample(M, g))
        kf = multiplicative_split(sample(K, g))
        s1 = additive_split(sample(L1, g))
        s2 = additive_split(sample(L2, g), shifts=(0.0, -L))
        z = g.points
        R1 = -2 * lam * kf.minus_factor.boundary / LineSamples(g, (z + 1j * lam0) * (z - 1j * lam1))
        R2 = 2 * lam * mf.plus_factor.boundary / LineSamples(g, (z + 1j) * (z - 1j * lam0))
        # difference convention L = L^+ - L^-
        return dict(R1=R1, R2=R2, Kp=kf.plus_factor.boundary, Mm=mf.minus_factor.boundary,
                    L1p=s1.plus.boundary, L1m=-s1.minus.boundary,
                    L2p=s2.plus.boundary, L2m=-s2.minus.boundary)

    on = {"a": pieces(a), "b": pieces(b), "out": pieces(out)}
    system = CoupledSystem(
        L, a, b, out,
        R1={k: on[k]["R1"] for k in ("a", "out")},
        R2={k: on[k]["R2"] for k in ("b", "out")},
        F1={k: on[k]["L1m"] for k in ("a", "out")},
        F2={k: on[k]["L2p"] for k in ("b", "out")},
    )
    o = on["out"]
    return Example2Pipeline(p, lam0, system, o["Kp"], o["Mm"], o["L1p"], o["L1m"], o["L2p"], o["L2m"])
