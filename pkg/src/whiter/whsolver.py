"""Iterative solver for the triangular Wiener-Hopf system.

The system on the real line is::

    Phi_-^(0) = A Psi_+^(0) + B exp(i alpha L) Psi_+^(L) + f1
    Phi_-^(L) = C exp(-i alpha L) Psi_+^(0) + f2

with ``B = B+ B-``. Eliminating ``Psi_+^(L)`` and ``Phi_-^(0)`` leaves a pair of
scalar equations for ``Phi_-^(L)`` (on a line ``Im alpha = a < 0``) and
``Psi_+^(0)`` (on ``Im alpha = b > 0``), coupled only through the factors
``exp(-+i alpha L)``. Each half step is one multiplicative and one additive
split; the coupling terms ``D`` and ``E`` are carried between the two lines by
analytic continuation.

In the reduced variables::

    K1 = A / (C B-)       K3 = A / B-
    f3 = A f2 / (C B-) - exp(-i alpha L) f1 / B-
    f4 = f1 / B-

and with ``D = (K1 Phi^(L))^+``, ``E = (K3 Psi^(0))^-``::

    (K1 Phi^(L))^- = f3^- + exp(-i alpha L) (E + f4^-)
    (K3 Psi^(0))^+ = f4^+ + exp(i alpha L) (D + f3^+)
    K2+ Psi^(L) = D + f3^+,     K4- Phi^(0) = E + f4^-

where ``K2+ = -B+``, ``K4- = 1/B-`` and the forcings are split as
``f = f^- - f^+`` (the plus parts carry the opposite sign to the usual
additive split).
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic_core import (
    DEFAULT_HALF_WIDTH,
    DEFAULT_N_POINTS,
    AnalyticHandle,
    HalfPlaneFunction,
    LineGrid,
    LineSamples,
    Strip,
    exp_factor,
    norm_on_line,
    sample,
)
from .errors import ConfigError, DivergenceError, DomainError
from .splitting import (
    MultiplicativeSplit,
    additive_split,
    continue_to,
    multiplicative_split,
)

log = logging.getLogger(__name__)

Handle = AnalyticHandle | Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    """Symbols and forcings of the triangular system, all analytic in ``strip``."""

    A: Handle
    B: Handle
    C: Handle
    f1: Handle
    f2: Handle
    L: float
    strip: Strip

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50
    stop_tol: float = 1e-8
    line_a: float | None = None
    line_b: float | None = None
    line_out: float = 0.0
    half_width: float = DEFAULT_HALF_WIDTH
    n_points: int = DEFAULT_N_POINTS
    keep_iterates: bool = True
    zero_start: bool = False  # start from Phi = 0 instead of the decoupled solution

    def __post_init__(self):
        if self.max_iter < 0:
            raise ConfigError("max_iter must be nonnegative")
        if not self.stop_tol > 0:
            raise ConfigError("stop_tol must be positive")

    def lines(self, strip: Strip) -> tuple[float, float]:
        a = 0.5 * strip.a if self.line_a is None else self.line_a
        b = 0.5 * strip.b if self.line_b is None else self.line_b
        if not (strip.a < a <= 0 <= b < strip.b):
            raise ConfigError(f"working lines a={a}, b={b} must satisfy {strip.a} < a <= 0 <= b < {strip.b}")
        return a, b


@dataclass(frozen=True)
class LineData:
    """Everything about the reduced system that lives on one line."""

    grid: LineGrid
    K1: MultiplicativeSplit
    K3: MultiplicativeSplit
    f3_plus: LineSamples
    f3_minus: LineSamples
    f4_plus: LineSamples
    f4_minus: LineSamples
    K2_plus: LineSamples
    K4_minus: LineSamples


@dataclass(frozen=True)
class ReducedSystem:
    L: float
    a: float
    b: float
    out: float
    on: dict[str, LineData] = field(repr=False)
    problem: ProblemSpec | None = field(default=None, repr=False)

    @property
    def line_a(self) -> LineData:
        return self.on["a"]

    @property
    def line_b(self) -> LineData:
        return self.on["b"]

    @property
    def line_out(self) -> LineData:
        return self.on["out"]


def harmonics(L: float, order: int = 2) -> tuple[float, ...]:
    """Exponents ``k L``, ``|k| <= order``, that may appear in the iterates.

    Forcings carrying ``exp(+-i alpha L)`` pick up a second factor through the
    coupling, so the tails of the iterates can oscillate at twice the rate.
    """
    return tuple(k * L for k in range(-order, order + 1))


def _line_data(grid, K1, K3, f3, f4, K2p, K4m, L) -> LineData:
    """Sample and split the reduced quantities on ``grid``."""
    k1 = sample(K1, grid)
    k3 = sample(K3, grid)
    s3 = additive_split(sample(f3, grid), shifts=harmonics(L))
    s4 = additive_split(sample(f4, grid), shifts=harmonics(L))
    return LineData(
        grid=grid,
        K1=multiplicative_split(k1),
        K3=multiplicative_split(k3),
        f3_plus=-s3.plus.boundary,
        f3_minus=s3.minus.boundary,
        f4_plus=-s4.plus.boundary,
        f4_minus=s4.minus.boundary,
        K2_plus=sample(K2p, grid),
        K4_minus=sample(K4m, grid),
    )


def reduce_symbols(
    K1: Handle,
    K3: Handle,
    f3: Handle,
    f4: Handle,
    L: float,
    a: float,
    b: float,
    *,
    K2_plus: Handle = lambda z: -np.ones_like(z),
    K4_minus: Handle = np.ones_like,
    out: float = 0.0,
    half_width: float = DEFAULT_HALF_WIDTH,
    n_points: int = DEFAULT_N_POINTS,
    problem: ProblemSpec | None = None,
) -> ReducedSystem:
    """Build a reduced system directly from its symbols.

    ``f3`` and ``f4`` are the full (unsplit) reduced forcings.
    """
    base = LineGrid(0.0, half_width, n_points)
    on = {}
    for key, c in (("a", a), ("b", b), ("out", out)):
        done = next((d for d in on.values() if d.grid.offset == c), None)
        on[key] = done or _line_data(base.at(c), K1, K3, f3, f4, K2_plus, K4_minus, L)
    return ReducedSystem(float(L), a, b, out, on, problem)


def _factor_B(problem: ProblemSpec, grid: LineGrid) -> MultiplicativeSplit:
    return multiplicative_split(sample(problem.B, grid))


def reduce(problem: ProblemSpec, options: SolverOptions = SolverOptions()) -> ReducedSystem:
    """Reduce the full system to the two scalar equations."""
    a, b = options.lines(problem.strip)
    out = options.line_out
    if not problem.strip.contains(out):
        raise DomainError(f"output line Im(alpha)={out} is outside the strip")
    L = problem.L
    # B+- are needed pointwise on every working line; cache their samples
    cache: dict[float, MultiplicativeSplit] = {}
    base = LineGrid(0.0, options.half_width, options.n_points)

    def b_split(z) -> MultiplicativeSplit:
        c = float(np.round(np.mean(z.imag), 12))
        if c not in cache:
            cache[c] = _factor_B(problem, base.at(c))
        return cache[c]

    def bm(z):
        return b_split(z).minus_factor.values

    def K1(z):
        return problem.A(z) / (problem.C(z) * bm(z))

    def K3(z):
        return problem.A(z) / bm(z)

    def f3(z):
        return (problem.A(z) * problem.f2(z) / problem.C(z) - np.exp(-1j * z * L) * problem.f1(z)) / bm(z)

    def f4(z):
        return problem.f1(z) / bm(z)

    def K2p(z):
        return -b_split(z).plus_factor.values

    def K4m(z):
        return 1.0 / bm(z)

    return reduce_symbols(
        K1, K3, f3, f4, L, a, b,
        K2_plus=K2p, K4_minus=K4m, out=out,
        half_width=options.half_width, n_points=options.n_points, problem=problem,
    )


# --------------------------------------------------------------------------
# one half step each


def coupling_D(sys: ReducedSystem, phi: HalfPlaneFunction) -> HalfPlaneFunction:
    """``D = (K1 Phi^(L))^+`` on the line of ``phi``."""
    ld = _data_for(sys, phi.defining_line.offset)
    prod = ld.K1.plus_factor.boundary * ld.K1.minus_factor.boundary * phi.boundary
    return additive_split(prod, shifts=harmonics(sys.L)).plus


def coupling_E(sys: ReducedSystem, psi: HalfPlaneFunction) -> HalfPlaneFunction:
    """``E = (K3 Psi^(0))^-`` on the line of ``psi``."""
    ld = _data_for(sys, psi.defining_line.offset)
    prod = ld.K3.plus_factor.boundary * ld.K3.minus_factor.boundary * psi.boundary
    return additive_split(prod, shifts=harmonics(sys.L)).minus


def _data_for(sys: ReducedSystem, offset: float) -> LineData:
    for ld in sys.on.values():
        if ld.grid.offset == offset:
            return ld
    raise DomainError(f"no reduced data on Im(alpha)={offset}")


def phi_from_E(sys: ReducedSystem, E: HalfPlaneFunction, key: str = "a") -> HalfPlaneFunction:
    ld = sys.on[key]
    E_here = continue_to(E, ld.grid.offset).boundary
    expo = exp_factor(ld.grid, -sys.L)
    G = (ld.f3_minus + expo * (E_here + ld.f4_minus)) / ld.K1.plus_factor.boundary
    part = additive_split(G, shifts=harmonics(sys.L)).minus
    return HalfPlaneFunction("minus", part.boundary / ld.K1.minus_factor.boundary, part.shifts)


def psi_from_D(sys: ReducedSystem, D: HalfPlaneFunction, key: str = "b") -> HalfPlaneFunction:
    ld = sys.on[key]
    D_here = continue_to(D, ld.grid.offset).boundary
    expo = exp_factor(ld.grid, sys.L)
    H = (ld.f4_plus + expo * (D_here + ld.f3_plus)) / ld.K3.minus_factor.boundary
    part = additive_split(H, shifts=harmonics(sys.L)).plus
    return HalfPlaneFunction("plus", part.boundary / ld.K3.plus_factor.boundary, part.shifts)


def initial_phi(sys: ReducedSystem, key: str = "a") -> HalfPlaneFunction:
    """``Phi^(L),0``: the coupling to ``Psi`` dropped entirely."""
    ld = sys.on[key]
    part = additive_split(ld.f3_minus / ld.K1.plus_factor.boundary).minus
    return HalfPlaneFunction("minus", part.boundary / ld.K1.minus_factor.boundary, part.shifts)


def iterate_psi(sys: ReducedSystem, phi_prev: HalfPlaneFunction) -> HalfPlaneFunction:
    return psi_from_D(sys, coupling_D(sys, phi_prev), "b")


def iterate_phi(sys: ReducedSystem, psi: HalfPlaneFunction) -> HalfPlaneFunction:
    return phi_from_E(sys, coupling_E(sys, psi), "a")


# --------------------------------------------------------------------------
# recovery and diagnostics


@dataclass(frozen=True)
class SolutionSet:
    """The four unknowns sampled on the output line."""

    phi0_minus: HalfPlaneFunction
    phiL_minus: HalfPlaneFunction
    psi0_plus: HalfPlaneFunction
    psiL_plus: HalfPlaneFunction

    @property
    def grid(self) -> LineGrid:
        return self.phiL_minus.defining_line


def recover_secondary(sys: ReducedSystem, phiL: HalfPlaneFunction, psi0: HalfPlaneFunction,
                      E: HalfPlaneFunction | None = None, D: HalfPlaneFunction | None = None) -> SolutionSet:
    """Assemble all four unknowns on the output line from the iterates.

    ``E`` and ``D`` may be passed when ``coupling_E(sys, psi0)`` and
    ``coupling_D(sys, phiL)`` are already at hand.
    """
    ld = sys.line_out
    c = ld.grid.offset
    D = coupling_D(sys, phiL) if D is None else D
    E = coupling_E(sys, psi0) if E is None else E
    phiL_out = phiL if phiL.defining_line.offset == c else phi_from_E(sys, E, "out")
    psi0_out = psi0 if psi0.defining_line.offset == c else psi_from_D(sys, D, "out")
    D_out = continue_to(D, c).boundary
    E_out = continue_to(E, c).boundary
    psiL = (D_out + ld.f3_plus) / ld.K2_plus
    phi0 = (E_out + ld.f4_minus) / ld.K4_minus
    return SolutionSet(
        HalfPlaneFunction("minus", phi0, (0.0, -sys.L)),
        phiL_out,
        psi0_out,
        HalfPlaneFunction("plus", psiL, (0.0, sys.L)),
    )


def residual(problem: ProblemSpec, sol: SolutionSet) -> tuple[float, float]:
    """Relative L2 residuals of the two rows of the original system."""
    grid = sol.grid
    A, B, C = (sample(h, grid) for h in (problem.A, problem.B, problem.C))
    f1, f2 = sample(problem.f1, grid), sample(problem.f2, grid)
    ep, em = exp_factor(grid, problem.L), exp_factor(grid, -problem.L)
    r1 = sol.phi0_minus.boundary - A * sol.psi0_plus.boundary - B * ep * sol.psiL_plus.boundary - f1
    r2 = sol.phiL_minus.boundary - C * em * sol.psi0_plus.boundary - f2
    scale = norm_on_line(f1) + norm_on_line(f2)
    scale = scale if scale > 0 else 1.0
    return norm_on_line(r1) / scale, norm_on_line(r2) / scale


@dataclass(frozen=True)
class ConvergenceEstimate:
    d1: float
    d2: float
    eps1: float
    eps2: float

    @property
    def q(self) -> float:
        return self.d1 * self.d2 * self.eps1 * self.eps2

    @property
    def contracting(self) -> bool:
        return self.q < 1

    def a_priori_bound(self, n: int, first_increment: float) -> float:
        """Bound on ``|Phi^n - Phi|`` given ``|Phi^1 - Phi^0|``."""
        if not self.contracting:
            return math.inf
        return self.q**n / (1 - self.q) * first_increment


def estimate_convergence(sys: ReducedSystem) -> ConvergenceEstimate:
    la, lb = sys.line_a, sys.line_b
    kp = np.abs(la.K1.plus_factor.values)
    km = np.abs(lb.K3.minus_factor.values)
    return ConvergenceEstimate(
        d1=float(kp.max()),
        d2=float(km.max()),
        eps1=float(math.exp(sys.a * sys.L) / kp.min()),
        eps2=float(math.exp(-sys.b * sys.L) / km.min()),
    )


@dataclass
class IterationReport:
    converged: bool = False
    stagnated: bool = False  # stopped at the discretisation noise floor
    iterations: int = 0
    phi_increments: list[float] = field(default_factory=list)
    psi_increments: list[float] = field(default_factory=list)
    # increments of the couplings D_n = (K1 Phi^n)^+ and E_n = (K3 Psi^n)^-
    d_increments: list[float] = field(default_factory=list)
    e_increments: list[float] = field(default_factory=list)
    residuals: list[tuple[float, float]] = field(default_factory=list)
    estimate: ConvergenceEstimate | None = None
    phi_iterates: list[HalfPlaneFunction] = field(default_factory=list, repr=False)
    psi_iterates: list[HalfPlaneFunction] = field(default_factory=list, repr=False)

    @property
    def ratios(self) -> list[float]:
        inc = self.phi_increments
        return [inc[k + 1] / inc[k] for k in range(len(inc) - 1) if inc[k] > 0]

    @property
    def q(self) -> float:
        return self.estimate.q if self.estimate else math.nan

    @property
    def bounds(self) -> list[float]:
        """A priori bounds on the relative error of ``Phi^n``, ``n = 0..iterations``."""
        if not self.phi_increments or self.estimate is None:
            return []
        first = self.phi_increments[0]
        return [self.estimate.a_priori_bound(n, first) for n in range(self.iterations + 1)]


# relative increments below this are at the level of the splitting error
NOISE_FLOOR = 1e-9


def _stalled(inc: Sequence[float]) -> bool:
    return len(inc) >= 3 and inc[-1] >= inc[-2] >= inc[-3]


def _diverging(q: float, inc: Sequence[float]) -> bool:
    return q >= 1 and _stalled(inc) and inc[-1] > NOISE_FLOOR


def solve(target: ProblemSpec | ReducedSystem, options: SolverOptions = SolverOptions()):
    """Run the alternating iteration to convergence.

    Returns ``(SolutionSet, IterationReport)``. Raises ``DivergenceError`` once
    the contraction estimate is at least one and three successive increments
    fail to decrease.
    """
    sys = reduce(target, options) if isinstance(target, ProblemSpec) else target
    problem = sys.problem
    est = estimate_convergence(sys)
    if not est.contracting:
        log.warning("contraction estimate q=%.3g >= 1; convergence is not guaranteed", est.q)
    rep = IterationReport(estimate=est)

    phi = HalfPlaneFunction.zero("minus", sys.line_a.grid) if options.zero_start else initial_phi(sys)
    scale = norm_on_line(initial_phi(sys).boundary) if options.zero_start else norm_on_line(phi.boundary)
    scale = scale or 1.0
    psi = D = E = D_next = None
    if options.keep_iterates:
        rep.phi_iterates.append(phi)
    for n in range(1, options.max_iter + 1):
        D_new = coupling_D(sys, phi) if D_next is None else D_next
        psi_new = psi_from_D(sys, D_new, "b")
        E_new = coupling_E(sys, psi_new)
        phi_new = phi_from_E(sys, E_new, "a")
        inc = norm_on_line(phi_new.boundary - phi.boundary) / scale
        rep.phi_increments.append(inc)
        if psi is not None:
            rep.psi_increments.append(norm_on_line(psi_new.boundary - psi.boundary) / scale)
            rep.d_increments.append(norm_on_line(D_new.boundary - D.boundary) / scale)
            rep.e_increments.append(norm_on_line(E_new.boundary - E.boundary) / scale)
        phi, psi, D, E = phi_new, psi_new, D_new, E_new
        rep.iterations = n
        if options.keep_iterates:
            rep.phi_iterates.append(phi)
            rep.psi_iterates.append(psi)
        if problem is not None:
            # the coupling of the new phi also seeds the next iteration
            D_next = coupling_D(sys, phi)
            rep.residuals.append(residual(problem, recover_secondary(sys, phi, psi, E, D_next)))
        log.debug("iteration %d: increment %.3e", n, inc)
        if not math.isfinite(inc):
            raise DivergenceError(f"iteration {n} produced non-finite values")
        if inc < options.stop_tol:
            rep.converged = True
            break
        if inc <= NOISE_FLOOR and _stalled(rep.phi_increments):
            log.warning("increments stalled at %.2e, above stop_tol=%.2e", inc, options.stop_tol)
            rep.stagnated = True
            break
        if _diverging(est.q, rep.phi_increments):
            raise DivergenceError(
                f"q={est.q:.3g} and increments {rep.phi_increments[-3:]} are not decreasing"
            )
    if psi is None:
        # no iterations: report the starting guess itself rather than the
        # next iterate that recover_secondary would rebuild from psi
        sol = recover_secondary(sys, phi, iterate_psi(sys, phi))
        start = HalfPlaneFunction.zero("minus", sys.line_out.grid) if options.zero_start else initial_phi(sys, "out")
        return replace(sol, phiL_minus=start), rep
    return recover_secondary(sys, phi, psi, E, D_next), rep


def fit_pole_coefficient(f: LineSamples, pole: complex) -> complex:
    """Least-squares ``c`` in ``f ~ c / (alpha - pole)``."""
    basis = 1.0 / (f.grid.points - pole)
    return complex(np.vdot(basis, f.values) / np.vdot(basis, basis))


# --------------------------------------------------------------------------
# cross-coupled form
#
# Systems whose partial factorisation is already available can often be
# brought to the form
#
#     P1 = -[exp(i alpha L) R2 (F2 + P2)]^-
#     P2 = -[exp(-i alpha L) R1 (F1 + P1)]^+
#
# with F1, P1 minus functions and F2, P2 plus functions. The minus projection
# is taken on line b where exp(i alpha L) is small, the plus projection on
# line a, and each result is carried to the other line before it is used.


@dataclass(frozen=True)
class CoupledSystem:
    L: float
    a: float
    b: float
    out: float
    R1: dict[str, LineSamples] = field(repr=False)
    R2: dict[str, LineSamples] = field(repr=False)
    F1: dict[str, LineSamples] = field(repr=False)
    F2: dict[str, LineSamples] = field(repr=False)

    @classmethod
    def build(cls, R1: Handle, R2: Handle, F1: Handle, F2: Handle, L: float, a: float, b: float,
              out: float = 0.0, half_width: float = DEFAULT_HALF_WIDTH, n_points: int = DEFAULT_N_POINTS):
        if not a < 0 < b:
            raise ConfigError(f"working lines need a < 0 < b, got a={a}, b={b}")
        base = LineGrid(0.0, half_width, n_points)
        grids = {"a": base.at(a), "b": base.at(b), "out": base.at(out)}
        return cls(
            float(L), a, b, out,
            {k: sample(R1, grids[k]) for k in ("a", "out")},
            {k: sample(R2, grids[k]) for k in ("b", "out")},
            {k: sample(F1, grids[k]) for k in ("a", "out")},
            {k: sample(F2, grids[k]) for k in ("b", "out")},
        )

    def estimate(self) -> float:
        """Product of the largest coupling multipliers on their lines."""
        ga, gb = self.R1["a"].grid, self.R2["b"].grid
        m1 = (exp_factor(ga, -self.L) * self.R1["a"]).max_abs()
        m2 = (exp_factor(gb, self.L) * self.R2["b"]).max_abs()
        return m1 * m2


@dataclass
class CoupledReport:
    converged: bool = False
    stagnated: bool = False
    iterations: int = 0
    increments: list[float] = field(default_factory=list)
    q: float = math.nan
    P1: list[LineSamples] = field(default_factory=list, repr=False)  # on the output line
    P2: list[LineSamples] = field(default_factory=list, repr=False)

    @property
    def ratios(self) -> list[float]:
        inc = self.increments
        return [inc[k + 1] / inc[k] for k in range(len(inc) - 1) if inc[k] > 0]


def coupled_step_P1(sys: CoupledSystem, P2_b: LineSamples) -> HalfPlaneFunction:
    """Minus unknown on line b from the current plus unknown there."""
    gb = P2_b.grid
    prod = exp_factor(gb, sys.L) * sys.R2["b"] * (sys.F2["b"] + P2_b)
    part = additive_split(prod, shifts=(0.0, sys.L)).minus
    return HalfPlaneFunction("minus", -part.boundary, part.shifts)


def coupled_step_P2(sys: CoupledSystem, P1_a: LineSamples) -> HalfPlaneFunction:
    ga = P1_a.grid
    prod = exp_factor(ga, -sys.L) * sys.R1["a"] * (sys.F1["a"] + P1_a)
    part = additive_split(prod, shifts=(0.0, -sys.L)).plus
    return HalfPlaneFunction("plus", -part.boundary, part.shifts)


def solve_coupled(sys: CoupledSystem, max_iter: int = 50, stop_tol: float = 1e-8):
    """Iterate the cross-coupled pair from ``P2 = 0``.

    The n-th entries of the report's ``P1``/``P2`` lists are the iterates on
    the output line; ``P1[n]`` is built from ``P2[n-1]``.
    """
    q = sys.estimate()
    if q >= 1:
        log.warning("coupling estimate q=%.3g >= 1; convergence is not guaranteed", q)
    rep = CoupledReport(q=q)
    P2_b = LineSamples.zeros(sys.R2["b"].grid)
    prev = None
    scale = None
    for n in range(max_iter + 1):
        p1 = coupled_step_P1(sys, P2_b)
        P1_a = continue_to(p1, sys.a).boundary
        p2 = coupled_step_P2(sys, P1_a)
        P2_b = continue_to(p2, sys.b).boundary
        rep.P1.append(continue_to(p1, sys.out).boundary)
        rep.P2.append(continue_to(p2, sys.out).boundary)
        rep.iterations = n
        if prev is not None:
            scale = scale or norm_on_line(prev) or 1.0
            inc = norm_on_line(P1_a - prev) / scale
            rep.increments.append(inc)
            if not math.isfinite(inc):
                raise DivergenceError(f"iteration {n} produced non-finite values")
            if inc < stop_tol:
                rep.converged = True
                break
            if inc <= NOISE_FLOOR and _stalled(rep.increments):
                rep.stagnated = True
                break
            if _diverging(q, rep.increments):
                raise DivergenceError(f"q={q:.3g} and increments {rep.increments[-3:]} are not decreasing")
        prev = P1_a
    return rep


def coupled_residual(sys: CoupledSystem, P1: LineSamples, P2: LineSamples) -> float:
    """Relative residual of both coupled equations, checked on the output line.

    The projections are recomputed on the output line itself, so this does
    not reuse any of the transported quantities of the iteration.
    """
    g = P1.grid
    prod1 = exp_factor(g, sys.L) * sys.R2["out"] * (sys.F2["out"] + P2)
    prod2 = exp_factor(g, -sys.L) * sys.R1["out"] * (sys.F1["out"] + P1)
    r1 = P1 + additive_split(prod1, shifts=(0.0, sys.L)).minus.boundary
    r2 = P2 + additive_split(prod2, shifts=(0.0, -sys.L)).plus.boundary
    scale = norm_on_line(sys.F1["out"]) + norm_on_line(sys.F2["out"]) or 1.0
    return (norm_on_line(r1) + norm_on_line(r2)) / scale
