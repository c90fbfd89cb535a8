import math

import numpy as np
import pytest
from conftest import rational

from whiter import examples as ex
from whiter.analytic_core import HalfPlaneFunction, LineGrid, Strip, norm_on_line
from whiter.errors import ConfigError, DivergenceError
from whiter.oracles import (
    Example1Params,
    Example2Params,
    example1_exact,
    example1_iterates,
    example2_iterates,
)
from whiter.splitting import additive_split
from whiter.whsolver import (
    CoupledSystem,
    ProblemSpec,
    SolverOptions,
    coupled_residual,
    estimate_convergence,
    initial_phi,
    iterate_phi,
    iterate_psi,
    recover_secondary,
    reduce,
    residual,
    solve,
    solve_coupled,
)

ONE = np.ones_like


def zero(z):
    return np.zeros_like(z)


def custom_problem(scale=1.0, L=2.0):
    lam = 0.6
    return ProblemSpec(
        A=lambda z: 1 + 0.5 / ((z - 1j * lam) * (z + 1j * lam)),
        B=rational([2j, -2j], [3j, -3j]),
        C=rational([2j], [3j]),
        f1=lambda z: scale * (1 / (z - 1j) + 1 / (z + 2j)),
        f2=lambda z: scale * np.exp(1j * z * L) / (z + 1.5j),
        L=L,
        strip=Strip(-0.5, 0.5),
    )


OPTS = SolverOptions(stop_tol=1e-9)


@pytest.fixture(scope="module")
def ex1_run():
    p = Example1Params(0.7 + 10j, 1.0)
    opts = ex.example1_options(p, stop_tol=1e-12)
    sys_ = reduce(ex.example1_problem(p), opts)
    sol, rep = solve(sys_, opts)
    return p, sys_, sol, rep


def test_problem_validation():
    with pytest.raises(ConfigError):
        ProblemSpec(ONE, ONE, ONE, zero, zero, 0.0, Strip(-1, 1))
    with pytest.raises(ConfigError):
        SolverOptions(line_a=0.5).lines(Strip(-1, 1))
    assert SolverOptions().lines(Strip(-1, 2)) == (-0.5, 1.0)


def test_reduce_example1_symbols(ex1_run):
    p, sys_, _, _ = ex1_run
    exact = example1_exact(p)
    for key in ("a", "b"):
        ld = sys_.on[key]
        z = ld.grid.points
        k1 = (ld.K1.plus_factor.boundary * ld.K1.minus_factor.boundary).values
        k3 = (ld.K3.plus_factor.boundary * ld.K3.minus_factor.boundary).values
        assert np.abs(k1 - exact.K1(z)).max() < 1e-10
        assert np.abs(k3 - k1).max() < 1e-12
        assert np.abs(ld.f3_minus.values - 1 / (z - 1j)).max() < 1e-10
        assert np.abs(ld.f3_plus.values - 1 / (z + 2j)).max() < 1e-10


def test_reduce_exact_factorisation_case():
    # A = k B- C with C a plus function leaves K1 = k
    k = 2.5
    Bm = rational([1j], [2j])
    C = rational([-1j], [-3j])
    prob = ProblemSpec(lambda z: k * Bm(z) * C(z), Bm, C, zero, zero, 1.0, Strip(-0.5, 0.5))
    sys_ = reduce(prob, OPTS)
    ld = sys_.line_a
    k1 = ld.K1.plus_factor.boundary * ld.K1.minus_factor.boundary
    assert np.abs(k1.values - k).max() < 1e-10


def test_zero_forcing_gives_zero_in_one_iteration():
    prob = ProblemSpec(ONE, ONE, ONE, zero, zero, 1.0, Strip(-1, 1))
    sys_ = reduce(prob, OPTS)
    assert sys_.line_a.f3_minus.max_abs() == 0 and sys_.line_b.f4_plus.max_abs() == 0
    sol, rep = solve(sys_, OPTS)
    assert rep.converged and rep.iterations == 1
    for f in (sol.phi0_minus, sol.phiL_minus, sol.psi0_plus, sol.psiL_plus):
        assert f.boundary.max_abs() == 0


def identity_symbol_system(L=1.0):
    f3 = lambda z: 1 / (z - 1j)
    prob = ProblemSpec(ONE, ONE, ONE, zero, f3, L, Strip(-1, 1))
    return reduce(prob, SolverOptions(line_a=-0.4, line_b=0.4))


def test_initial_phi_identity_symbol():
    sys_ = identity_symbol_system()
    phi = initial_phi(sys_)
    assert phi.side == "minus"
    assert np.abs(phi.values - sys_.line_a.f3_minus.values).max() < 1e-11


def test_iterate_phi_from_zero_is_initial():
    sys_ = identity_symbol_system()
    psi0 = HalfPlaneFunction.zero("plus", sys_.line_b.grid)
    phi = iterate_phi(sys_, psi0)
    assert np.abs(phi.values - initial_phi(sys_).values).max() < 1e-12


def test_iterate_psi_zero_propagation():
    prob = ProblemSpec(ONE, ONE, ONE, zero, zero, 1.0, Strip(-1, 1))
    sys_ = reduce(prob, OPTS)
    psi = iterate_psi(sys_, HalfPlaneFunction.zero("minus", sys_.line_a.grid))
    assert psi.side == "plus" and psi.boundary.max_abs() == 0


def test_estimate_for_constant_symbols():
    sys_ = identity_symbol_system(L=3.0)
    est = estimate_convergence(sys_)
    assert est.d1 == pytest.approx(1) and est.d2 == pytest.approx(1)
    assert est.eps1 == pytest.approx(math.exp(-3 * 0.4))
    assert est.eps2 == pytest.approx(math.exp(-3 * 0.4))
    assert est.q == pytest.approx(math.exp(-3 * 0.8))
    assert est.a_priori_bound(2, 1.0) == pytest.approx(est.q**2 / (1 - est.q))


def test_q_decreases_with_L():
    qs = []
    for L in (0.5, 1.0, 2.0, 4.0):
        p = Example1Params(0.7 + 10j, L)
        qs.append(estimate_convergence(reduce(ex.example1_problem(p), ex.example1_options(p))).q)
    assert all(q1 > q2 for q1, q2 in zip(qs, qs[1:]))


def test_example1_solution_matches_oracle(ex1_run):
    p, sys_, sol, rep = ex1_run
    exact = example1_exact(p)
    z = sol.grid.points
    assert rep.converged
    assert np.abs(sol.phiL_minus.values - exact.phiL(z)).max() < 1e-9
    assert np.abs(sol.psi0_plus.values - exact.psi0(z)).max() < 1e-9
    assert max(rep.residuals[-1]) < 1e-9


def test_example1_iterates_match_recurrence(ex1_run):
    p, sys_, _, rep = ex1_run
    got = ex.example1_constants(sys_, rep.phi_iterates, rep.psi_iterates, p.lam)
    want = example1_iterates(p, len(got) - 1)
    for (k1, k2), (w1, w2) in zip(got, want):
        assert abs(k1 - w1) <= 1e-8 * abs(w1)
        assert abs(k2 - w2) <= 1e-8 * abs(w2)


def test_iterates_stay_in_class(ex1_run):
    _, _, _, rep = ex1_run
    for phi in rep.phi_iterates[1:]:
        assert additive_split(phi.boundary, phi.shifts).plus.boundary.max_abs() < 1e-9 * phi.boundary.max_abs()
    for psi in rep.psi_iterates:
        assert additive_split(psi.boundary, psi.shifts).minus.boundary.max_abs() < 1e-9 * psi.boundary.max_abs()


def test_coupling_increments_recorded(ex1_run):
    _, _, _, rep = ex1_run
    assert len(rep.d_increments) == len(rep.e_increments) == rep.iterations - 1
    assert rep.d_increments[1] < rep.d_increments[0]
    bounds = rep.bounds
    assert len(bounds) == rep.iterations + 1 and bounds[1] < bounds[0]


def test_residual_decreases_with_iterations():
    p = Example1Params(0.2, 2.0)
    opts = ex.example1_options(p, stop_tol=1e-10)
    _, rep = solve(ex.example1_problem(p), opts)
    res = [sum(r) for r in rep.residuals]
    assert all(b < a for a, b in zip(res[:5], res[1:6]))


def test_residual_of_zero_solution():
    prob = ProblemSpec(ONE, ONE, ONE, lambda z: 1 / (z - 1j), zero, 1.0, Strip(-1, 1))
    grid = LineGrid()
    z = HalfPlaneFunction.zero("minus", grid)
    from whiter.whsolver import SolutionSet

    sol = SolutionSet(z, z, HalfPlaneFunction.zero("plus", grid), HalfPlaneFunction.zero("plus", grid))
    r1, r2 = residual(prob, sol)
    assert r1 == pytest.approx(1.0) and r2 == 0


def test_general_B_and_C():
    sol, rep = solve(custom_problem(), OPTS)
    assert max(rep.residuals[-1]) < 1e-9
    assert sol.phi0_minus.side == "minus" and sol.psiL_plus.side == "plus"


def test_contraction_independent_of_forcing():
    _, rep1 = solve(custom_problem(1.0), OPTS)
    _, rep10 = solve(custom_problem(10.0), OPTS)
    r1, r10 = rep1.ratios[:2], rep10.ratios[:2]
    assert r1 == pytest.approx(r10, rel=1e-6)


def test_initial_guess_independence():
    opts = SolverOptions(stop_tol=1e-10)
    sol_a, _ = solve(custom_problem(), opts)
    sol_b, rep_b = solve(custom_problem(), SolverOptions(stop_tol=1e-10, zero_start=True))
    assert rep_b.phi_iterates[0].boundary.max_abs() == 0
    diff = sol_a.phiL_minus.boundary - sol_b.phiL_minus.boundary
    assert norm_on_line(diff) < 1e-8 * norm_on_line(sol_a.phiL_minus.boundary)


def test_recover_secondary_zero():
    prob = ProblemSpec(ONE, ONE, ONE, zero, zero, 1.0, Strip(-1, 1))
    sys_ = reduce(prob, OPTS)
    sol = recover_secondary(
        sys_, HalfPlaneFunction.zero("minus", sys_.line_a.grid), HalfPlaneFunction.zero("plus", sys_.line_b.grid)
    )
    assert all(f.boundary.max_abs() == 0 for f in (sol.phi0_minus, sol.phiL_minus, sol.psi0_plus, sol.psiL_plus))


def test_max_iter_zero_returns_initial(ex1_run):
    p, sys_, _, _ = ex1_run
    _, rep = solve(sys_, SolverOptions(max_iter=0))
    assert rep.iterations == 0 and not rep.converged
    assert np.array_equal(rep.phi_iterates[0].values, initial_phi(sys_).values)


def test_divergence_detected(monkeypatch):
    import whiter.whsolver as ws

    # couplings with real content; with identity symbols D is rounding noise
    sys_ = reduce(custom_problem(), SolverOptions(n_points=4096, half_width=100.0))
    real = ws.phi_from_E
    count = {"n": 0}

    def blowing_up(s, E, key="a"):
        count["n"] += 1
        phi = real(s, E, key)
        return HalfPlaneFunction("minus", phi.boundary * 3.0**count["n"], phi.shifts)

    monkeypatch.setattr(ws, "phi_from_E", blowing_up)
    monkeypatch.setattr(ws, "estimate_convergence", lambda s: ws.ConvergenceEstimate(2.0, 1.0, 1.0, 1.0))
    with pytest.raises(DivergenceError):
        solve(sys_, SolverOptions(max_iter=20))


def test_coupled_example2_matches_iterates():
    p = Example2Params(0.1, 1e-4)
    pipe = ex.example2_pipeline(p)
    rep = solve_coupled(pipe.system, max_iter=10, stop_tol=1e-12)
    want = example2_iterates(p, rep.iterations)
    for n in range(rep.iterations + 1):
        c1, c2 = pipe.constants(rep.P1[n], rep.P2[n])
        assert abs(c1 - want[n][0]) < 1e-10
        assert abs(c2 - want[n][1]) < 1e-10
    assert coupled_residual(pipe.system, rep.P1[-1], rep.P2[-1]) < 1e-9


def test_coupled_divergence():
    c = 8.0
    sys_ = CoupledSystem.build(
        lambda z: c / ((z + 0.8j) * (z - 1j)),
        lambda z: c / ((z - 0.8j) * (z + 1j)),
        lambda z: 1 / (z - 1j),
        lambda z: 1 / (z + 1j),
        0.05, -0.3, 0.3,
    )
    assert sys_.estimate() > 1
    with pytest.raises(DivergenceError):
        solve_coupled(sys_, max_iter=20)
    with pytest.raises(ConfigError):
        CoupledSystem.build(ONE, ONE, zero, zero, 1.0, 0.1, 0.3)


def test_coupled_rate_matches_b_squared_far_case():
    # the measured contraction settles the size of b independently of the oracle
    p = Example2Params(-15.0, 0.04)
    pipe = ex.example2_pipeline(p)
    rep = solve_coupled(pipe.system, max_iter=6, stop_tol=1e-14)
    assert rep.ratios[0] == pytest.approx(0.0747, abs=5e-4)
    want = example2_iterates(p, rep.iterations)
    c1, c2 = pipe.constants(rep.P1[-1], rep.P2[-1])
    assert abs(c1 - want[-1][0]) < 1e-8 and abs(c2 - want[-1][1]) < 1e-8
