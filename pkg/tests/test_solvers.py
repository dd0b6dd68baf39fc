import json
import math
import warnings

import numpy as np
import pytest

from fraclap.energy import EnergyFunctional, ShiftedPotential, SingularPotential
from fraclap.exceptions import ConvergenceError, DivergenceError, PositivityCollapse
from fraclap.grid import build_grid
from fraclap.operator import assemble, weak_residual
from fraclap.profiles import BUMP, SIN
from fraclap.solvers import (SemilinearTerm, SolveConfig, barriers, composite_residual,
                             minimize_j_omega, semilinear_energy, semilinear_potential,
                             solve_semilinear, solve_torsion, solve_u0, solve_weak_newton)
from fraclap.verification import torsion_oracle


@pytest.fixture(scope="module")
def half():
    return assemble(build_grid(-1, 1, 256), 0.5)


@pytest.fixture(scope="module")
def quarter():
    return assemble(build_grid(-1, 1, 128), 0.25)


def test_config_validation():
    for bad in (dict(tol_residual=0), dict(damping=0), dict(damping=1.5), dict(max_iter=0),
                dict(prox_tol=-1), dict(relaxation=0)):
        with pytest.raises(ValueError):
            SolveConfig(**bad)


# --- torsion -----------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_torsion_positive_and_converged(s):
    op = assemble(build_grid(0, 2, 64), s)
    rep = solve_torsion(op)
    assert rep.converged and rep.path == "torsion"
    assert np.all(rep.solution > 0)
    assert weak_residual(op, rep.solution, np.ones(63)) <= 1e-10


def test_torsion_approaches_closed_form():
    errs0, errs5 = [], []
    for n in (128, 256, 512, 1024):
        op = assemble(build_grid(-1, 1, n), 0.5)
        u = solve_torsion(op).solution
        x = op.grid.nodes
        errs0.append(abs(u[np.argmin(np.abs(x))] - 1.0))
        errs5.append(abs(u[np.argmin(np.abs(x - 0.5))] - math.sqrt(0.75)))
    assert errs0 == sorted(errs0, reverse=True) and errs0[-1] < 1e-2
    assert errs5 == sorted(errs5, reverse=True) and errs5[-1] < 1e-2


def test_torsion_oracle_on_shifted_interval():
    op = assemble(build_grid(0, 3, 512), 0.25)
    u = solve_torsion(op).solution
    x = op.grid.nodes
    mid = np.abs(x - 1.5) <= 0.75
    assert np.max(np.abs(u - torsion_oracle(x, 0.25, 0, 3))[mid]) < 1e-2


# --- barriers and u0 ------------------------------------------------------------------

def test_barrier_formulas():
    u1 = np.array([0.25, 1.0, 0.5])
    lo, hi = barriers(u1, 1.0)
    np.testing.assert_allclose(lo, u1)
    np.testing.assert_allclose(hi, np.sqrt(2 * u1))


def test_barriers_have_no_nan_as_gamma_tends_to_zero():
    u1 = np.array([0.1, 0.4, 0.2])
    for g in (1e-2, 1e-5, 1e-9):
        lo, hi = barriers(u1, g)
        assert np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
    np.testing.assert_allclose(lo, u1, rtol=1e-8)
    np.testing.assert_allclose(hi, u1, rtol=1e-8)


def test_u0_gamma_one_centre_value(half):
    rep = solve_u0(half, SingularPotential(1.0))
    centre = rep.solution[np.argmin(np.abs(half.grid.nodes))]
    assert 1.0 - 5e-3 <= centre <= math.sqrt(2)
    assert rep.final_residual <= 1e-10 and rep.converged


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0, 4.0])
def test_u0_residual_and_barriers(quarter, gamma):
    sp = SingularPotential(gamma)
    rep = solve_u0(quarter, sp)
    u = rep.solution
    assert weak_residual(quarter, u, u ** -gamma) <= 1e-10
    assert np.all(rep.barrier_check <= 0)
    lo, hi = rep.extras["lower_barrier"], rep.extras["upper_barrier"]
    assert np.all(lo <= u) and np.all(u <= hi)


def test_u0_without_projection_agrees(quarter):
    sp = SingularPotential(2.0)
    a = solve_u0(quarter, sp).solution
    b = solve_u0(quarter, sp, project=False).solution
    assert np.max(np.abs(a - b)) <= 1e-12


def test_u0_non_convergence_carries_report(quarter):
    with pytest.raises(ConvergenceError) as info:
        solve_u0(quarter, SingularPotential(4.0), SolveConfig(max_iter=1))
    assert info.value.report.iterations == 1
    assert len(info.value.report.residual_history) >= 1


def test_u0_is_ordered_in_gamma_recorded(quarter):
    # reported, not asserted: where u0 >= 1 larger gamma gives smaller u0
    u_a = solve_u0(quarter, SingularPotential(1.0)).solution
    u_b = solve_u0(quarter, SingularPotential(2.0)).solution
    assert np.all(np.isfinite(u_a - u_b))


# --- weak Newton ----------------------------------------------------------------------

def test_weak_newton_zero_data_is_u0(half):
    sp = SingularPotential(2.0)
    a = solve_u0(half, sp).solution
    b = solve_weak_newton(half, sp, np.zeros(half.grid.size)).solution
    assert np.max(np.abs(a - b)) <= 1e-9


def test_weak_newton_unit_data_dominates_u0(half):
    sp = SingularPotential(1.0)
    u0 = solve_u0(half, sp).solution
    rep = solve_weak_newton(half, sp, np.ones(half.grid.size))
    assert rep.final_residual <= 1e-10
    assert np.all(rep.solution >= u0)


def test_weak_newton_sign_changing_data(half):
    sp = SingularPotential(0.5)
    omega = SIN.sample(half.grid)
    rep = solve_weak_newton(half, sp, omega)
    u = rep.solution
    assert np.all(u > 0)
    assert weak_residual(half, u, u ** -0.5 + omega) <= 1e-10


def test_weak_newton_stays_positive_under_strongly_negative_data():
    # u^(-gamma) blows up at zero, so the discrete problem is solvable for any data
    op = assemble(build_grid(-1, 1, 64), 0.5)
    rep = solve_weak_newton(op, SingularPotential(0.5), np.full(63, -1e3))
    u = rep.solution
    assert rep.converged and np.all(u > 0) and np.max(u) < 1e-3


def test_positivity_collapse_is_reported():
    # a tiny fraction-to-boundary factor keeps every step limited
    op = assemble(build_grid(-1, 1, 64), 0.5)
    with pytest.raises(PositivityCollapse) as info:
        solve_weak_newton(op, SingularPotential(0.5), np.full(63, -1e3), SolveConfig(damping=1e-3))
    assert info.value.report is not None


# --- variational route ------------------------------------------------------------------

def test_minimizer_zero_data_stays_at_anchor(quarter):
    sp = SingularPotential(2.0)
    u0 = solve_u0(quarter, sp).solution
    E = EnergyFunctional(quarter, ShiftedPotential(sp, u0), np.zeros(quarter.grid.size))
    rep = minimize_j_omega(E)
    assert np.max(np.abs(rep.extras["v"])) <= 1e-6
    assert rep.energy_value == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("omega_kind", ["one", "bump", "sin"])
def test_minimizer_matches_weak_newton(half, omega_kind):
    sp = SingularPotential(1.0)
    grid = half.grid
    omega = {"one": np.ones(grid.size), "bump": BUMP.sample(grid), "sin": SIN.sample(grid)}[omega_kind]
    u0 = solve_u0(half, sp).solution
    E = EnergyFunctional(half, ShiftedPotential(sp, u0), omega)
    rep = minimize_j_omega(E)
    assert rep.converged and rep.final_residual <= 1e-10
    assert rep.energy_value <= 0.0 and rep.extras["below_anchor"]
    ref = solve_weak_newton(half, sp, omega).solution
    assert np.max(np.abs(rep.solution - ref)) <= 1e-6


def test_minimizer_budget_exhaustion(quarter):
    sp = SingularPotential(1.0)
    u0 = solve_u0(quarter, sp).solution
    E = EnergyFunctional(quarter, ShiftedPotential(sp, u0), np.ones(quarter.grid.size))
    with pytest.raises(ConvergenceError) as info:
        minimize_j_omega(E, SolveConfig(max_iter=1, tol_residual=1e-14))
    assert info.value.report.path == "variational_min"


def test_composite_residual_vanishes_at_weak_solution(half):
    sp = SingularPotential(2.0)
    u0 = solve_u0(half, sp).solution
    omega = BUMP.sample(half.grid)
    u = solve_weak_newton(half, sp, omega).solution
    res = composite_residual(half, ShiftedPotential(sp, u0), u - u0, omega)
    assert res <= 1e-8
    assert composite_residual(half, ShiftedPotential(sp, u0), np.zeros_like(u0), omega) > 1e-3


# --- semilinear -------------------------------------------------------------------------

def test_semilinear_zero_term(quarter):
    sp = SingularPotential(1.0)
    u0 = solve_u0(quarter, sp)
    rep = solve_semilinear(quarter, sp, SemilinearTerm.zero(), u0_report=u0)
    assert np.max(np.abs(rep.extras["w"])) <= 1e-12
    assert rep.extras["F_residual"] <= 1e-8


def test_semilinear_constant_term_reduces_to_data(quarter):
    sp = SingularPotential(1.0)
    rep = solve_semilinear(quarter, sp, SemilinearTerm.constant(0.7))
    ref = solve_weak_newton(quarter, sp, np.full(quarter.grid.size, 0.7)).solution
    assert np.max(np.abs(rep.solution - ref)) <= 1e-6


def test_semilinear_truncated_linear(quarter):
    sp = SingularPotential(1.0)
    term = SemilinearTerm.truncated_linear(0.1, 10.0)
    rep = solve_semilinear(quarter, sp, term)
    assert rep.converged and rep.final_residual <= 1e-8
    assert rep.extras["F_residual"] <= 1e-6
    audit = rep.extras["growth_audit"]
    assert audit["performed"] and audit["passed"] and audit["exponent"] == pytest.approx(3.0)
    w = rep.extras["w"]
    shifted = ShiftedPotential(sp, rep.extras["u0"])
    assert semilinear_energy(quarter, shifted, term, w) == pytest.approx(
        0.5 * w @ quarter.A @ w + quarter.grid.h * shifted.values(w).sum()
        + semilinear_potential(quarter, shifted, term, w))


def test_semilinear_growth_audit_skipped_outside_embedding(half):
    audit = SemilinearTerm.truncated_linear(0.1, 10.0).audit(half)
    assert audit["performed"] is False and audit["passed"] is None


def test_semilinear_quadrature_primitive_matches_closed_form():
    term = SemilinearTerm.truncated_linear(0.3, 2.0)
    bare = SemilinearTerm(term.g, term.a_bound, term.b_bound)
    x = np.linspace(0, 1, 5)
    u0 = np.array([0.5, 1.0, 1.5, 2.5, 0.1])
    w = np.array([0.3, -0.4, 1.0, 2.0, 5.0])
    # the kink at t = M makes Gauss-Legendre inexact only on intervals crossing it
    np.testing.assert_allclose(bare.G1(x, u0, w), term.G1(x, u0, w), rtol=2e-3)


def test_semilinear_divergence_is_reported():
    op = assemble(build_grid(-1, 1, 64), 0.25)
    sp = SingularPotential(1.0)
    # linear g above the first eigenvalue of L: the Picard map is expanding
    lam = 2.0 * np.linalg.eigvalsh(op.L)[0]
    term = SemilinearTerm(lambda x, t: lam * t, 0.0, lam, name="expanding")
    with pytest.warns(RuntimeWarning, match="growth bound"):
        with pytest.raises(DivergenceError) as info:
            solve_semilinear(op, sp, term, SolveConfig(max_iter=60))
    hist = info.value.report.residual_history
    assert all(b > a for a, b in zip(hist[-11:], hist[-10:]))


# --- reports ------------------------------------------------------------------------------

def test_report_serializes(quarter):
    rep = solve_u0(quarter, SingularPotential(1.0))
    d = json.loads(rep.to_json())
    assert d["path"] == "u0" and d["converged"] is True
    assert len(d["solution"]) == quarter.grid.size
    assert d["grid"]["n"] == 128 and d["grid"]["outside_hypotheses"] is False


def test_solvers_are_deterministic(quarter):
    sp = SingularPotential(2.0)
    u0 = solve_u0(quarter, sp).solution
    E = EnergyFunctional(quarter, ShiftedPotential(sp, u0), BUMP.sample(quarter.grid))
    a, b = minimize_j_omega(E).solution, minimize_j_omega(E).solution
    assert np.array_equal(a, b)
