import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fraclap.energy import (INF, EnergyFunctional, ShiftedPotential, SingularPotential, dg0, g0,
                            j_omega, phi, prox_g0)
from fraclap.exceptions import BracketError
from fraclap.grid import build_grid
from fraclap.operator import assemble
from fraclap.solvers import solve_u0

GAMMAS = (0.5, 1.0, 2.0, 4.0)


def one_node(gamma, u0=1.0):
    return ShiftedPotential(SingularPotential(gamma), np.array([u0]))


# --- Phi ------------------------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS + (0.3, 1.7))
def test_phi_vanishes_at_one(gamma):
    assert phi(SingularPotential(gamma), 1.0) == 0.0


def test_phi_closed_form_gamma_two():
    assert phi(SingularPotential(2.0), 2.0) == pytest.approx(-0.5, abs=1e-15)
    ref = -integrate.quad(lambda t: t ** -2.0, 1, 2)[0]
    assert phi(SingularPotential(2.0), 2.0) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_phi_is_infinite_for_negative_argument(gamma):
    assert phi(SingularPotential(gamma), -0.1) == INF


def test_phi_at_zero():
    assert phi(SingularPotential(0.5), 0.0) == pytest.approx(2.0)
    assert phi(SingularPotential(1.0), 0.0) == INF
    assert phi(SingularPotential(3.0), 0.0) == INF


@pytest.mark.parametrize("gamma", [0.0, -1.0, math.inf, math.nan])
def test_gamma_validation(gamma):
    with pytest.raises(ValueError):
        SingularPotential(gamma)


# --- G0 ----------------------------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS)
def test_g0_vanishes_at_anchor(gamma):
    sh = ShiftedPotential(SingularPotential(gamma), np.array([0.3, 1.0, 2.5]))
    assert np.all(sh.values(np.zeros(3)) == 0)


def test_g0_closed_form_gamma_one():
    sh = one_node(1.0)
    assert g0(sh, 0, 1.0) == pytest.approx(1 - math.log(2), abs=1e-15)
    ref = integrate.quad(lambda t: 1 - 1 / (1 + t), 0, 1)[0]
    assert g0(sh, 0, 1.0) == pytest.approx(ref, abs=1e-12)
    assert g0(sh, 0, -1.0) == INF


@pytest.mark.parametrize("gamma", GAMMAS)
def test_g0_infinite_below_barrier(gamma):
    sh = one_node(gamma, 0.7)
    assert g0(sh, 0, -0.71) == INF
    edge = g0(sh, 0, -0.7)
    assert (edge == INF) == (gamma >= 1)


@pytest.mark.parametrize("gamma", GAMMAS + (0.3, 1.7, 6.0))
def test_g0_matches_definition(gamma):
    sp = SingularPotential(gamma)
    u0 = np.array([0.2, 1.0, 3.0])
    sh = ShiftedPotential(sp, u0)
    for v in (-0.15, -0.01, 0.003, 0.04, 0.5, 2.0):
        direct = sp.value(u0 + v) - sp.value(u0) + v * u0 ** (-gamma)
        np.testing.assert_allclose(sh.values(np.full(3, v)), direct, rtol=1e-8, atol=1e-15)


@pytest.mark.parametrize("gamma", GAMMAS + (1.7,))
def test_g0_is_accurate_near_the_anchor(gamma):
    # the closed form cancels catastrophically for small |v|; compare with a
    # 50-digit evaluation of the definition
    mpmath.mp.dps = 50
    g, a = mpmath.mpf(gamma), mpmath.mpf("1.3")

    def exact(v):
        v = mpmath.mpf(v)
        if gamma == 1.0:
            return -mpmath.log(a + v) + mpmath.log(a) + v / a
        return ((a + v) ** (1 - g) - a ** (1 - g)) / (g - 1) + v * a ** (-g)

    sh = one_node(gamma, 1.3)
    for v in (1e-8, -3e-5, 0.02, -0.049, 0.051, -0.3):
        assert g0(sh, 0, v) == pytest.approx(float(exact(v)), rel=1e-12, abs=0)


def test_anchor_must_be_positive():
    with pytest.raises(ValueError):
        ShiftedPotential(SingularPotential(1.0), np.array([1.0, 0.0]))


# --- derivative ------------------------------------------------------------------------

def test_dg0_values():
    sh = one_node(1.0)
    assert dg0(sh, 0, 0.0) == 0.0
    assert dg0(sh, 0, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dg0(sh, 0, -1.0)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_dg0_matches_central_differences(gamma):
    sh = one_node(gamma, 0.8)
    for v in (-0.5, -0.1, 0.2, 1.5):
        errs = []
        for d in (1e-2, 5e-3):
            fd = (g0(sh, 0, v + d) - g0(sh, 0, v - d)) / (2 * d)
            errs.append(abs(fd - dg0(sh, 0, v)))
        # second order: halving the step divides the error by about four
        assert errs[1] < 0.3 * errs[0] or errs[1] < 1e-10


# --- prox ---------------------------------------------------------------------------------

def test_prox_at_zero_is_zero():
    for gamma in GAMMAS:
        assert prox_g0(one_node(gamma), 0, 0.0, 0.7) == pytest.approx(0.0, abs=1e-14)


def test_prox_golden_ratio():
    assert prox_g0(one_node(1.0), 0, 1.0, 1.0) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_prox_optimality(gamma):
    rng = np.random.default_rng(3)
    u0 = rng.uniform(0.05, 2.0, 200)
    sh = ShiftedPotential(SingularPotential(gamma), u0)
    z = rng.normal(0, 3, 200)
    tau = rng.uniform(1e-4, 5, 200)
    v = sh.prox(z, tau)
    assert np.all(u0 + v > 0)
    np.testing.assert_allclose(v - z + tau * sh.derivatives(v), 0, atol=1e-9)


def test_prox_bracket_failure():
    sh = one_node(1.0)
    with pytest.raises(BracketError):
        sh.prox(np.array([-1e300]), 1e-300)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(GAMMAS), st.floats(0.05, 5), st.floats(1e-3, 10),
       st.floats(-20, 20), st.floats(-20, 20))
def test_prox_is_monotone_and_nonexpansive(gamma, u0, tau, z1, z2):
    sh = one_node(gamma, u0)
    p1, p2 = sh.prox_g0(0, z1, tau), sh.prox_g0(0, z2, tau)
    assert abs(p1 - p2) <= abs(z1 - z2) + 1e-11
    if z1 < z2:
        assert p1 <= p2 + 1e-11


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(GAMMAS), st.floats(0.05, 5), st.floats(-0.99, 10), st.floats(-0.99, 10),
       st.floats(0.01, 0.99))
def test_g0_is_convex(gamma, u0, r1, r2, t):
    sh = one_node(gamma, u0)
    v1, v2 = r1 * u0, r2 * u0
    lhs = g0(sh, 0, t * v1 + (1 - t) * v2)
    rhs = t * g0(sh, 0, v1) + (1 - t) * g0(sh, 0, v2)
    assert lhs <= rhs + 1e-12 * max(1.0, abs(rhs))


# --- energy ----------------------------------------------------------------------------------

@pytest.fixture(scope="module", params=[(0.5, 1.0), (0.25, 4.0), (0.75, 0.5)])
def energy(request):
    s, gamma = request.param
    op = assemble(build_grid(-1, 1, 64), s)
    sp = SingularPotential(gamma)
    u0 = solve_u0(op, sp).solution
    omega = np.sin(np.pi * op.grid.nodes)
    return EnergyFunctional(op, ShiftedPotential(sp, u0), omega)


def test_energy_is_zero_at_anchor(energy):
    assert energy.value_at_anchor == 0.0
    assert j_omega(energy, np.zeros(energy.op.grid.size)) == 0.0
    assert energy.value_u(energy.u0) == 0.0


def test_energy_is_infinite_below_barrier(energy):
    v = np.zeros(energy.op.grid.size)
    v[10] = -1.01 * energy.u0[10]
    assert j_omega(energy, v) == INF


def test_finite_energy_implies_nonnegative_u(energy):
    rng = np.random.default_rng(11)
    for _ in range(200):
        v = energy.u0 * rng.uniform(-1.2, 1.0, energy.u0.size)
        if math.isfinite(energy.value(v)):
            u = energy.u0 + v
            assert np.all(u >= 0)
            if energy.shifted.gamma >= 1:
                assert np.all(u > 0)


def test_energy_is_strictly_convex(energy):
    rng = np.random.default_rng(5)
    m = energy.u0.size
    checked = 0
    for _ in range(1000):
        v1 = energy.u0 * rng.uniform(-0.9, 2, m)
        v2 = energy.u0 * rng.uniform(-0.9, 2, m)
        mid = energy.value(0.5 * (v1 + v2))
        avg = 0.5 * (energy.value(v1) + energy.value(v2))
        if math.isfinite(avg):
            # the quadratic part alone gives a margin of (1/8) d^T A d
            margin = 0.125 * (v1 - v2) @ energy.op.A @ (v1 - v2)
            assert mid <= avg - margin * (1 - 1e-9)
            checked += 1
    assert checked == 1000


def test_energy_is_coercive_along_rays(energy):
    rng = np.random.default_rng(9)
    for _ in range(10):
        d = rng.standard_normal(energy.u0.size)
        vals = [energy.value(t * np.abs(d)) for t in (1, 10, 100, 1000)]
        assert vals[0] < vals[1] < vals[2] < vals[3]


def test_zero_data_energy_is_nonnegative():
    op = assemble(build_grid(-1, 1, 64), 0.5)
    sp = SingularPotential(2.0)
    u0 = solve_u0(op, sp).solution
    E = EnergyFunctional(op, ShiftedPotential(sp, u0), np.zeros(63))
    rng = np.random.default_rng(2)
    for _ in range(100):
        v = u0 * rng.uniform(-0.5, 0.5, 63)
        assert E.value(v) >= 0


def test_gradient_matches_finite_differences(energy):
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = energy.u0 * rng.uniform(-0.5, 1.0, energy.u0.size)
        d = rng.standard_normal(energy.u0.size)
        delta = 1e-6 * max(1.0, np.max(np.abs(v)))
        fd = (energy.value(v + delta * d) - energy.value(v - delta * d)) / (2 * delta)
        an = energy.gradient(v) @ d
        assert abs(fd - an) <= 1e-6 * abs(an)


def test_energy_shape_validation(energy):
    with pytest.raises(ValueError):
        EnergyFunctional(energy.op, energy.shifted, np.zeros(5))
