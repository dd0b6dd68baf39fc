"""General data: weak-form Newton against energy minimisation.

Run: python3 demos/03_weak_and_variational_routes.py
"""
import numpy as np

from fraclap import (EnergyFunctional, OmegaSpec, ShiftedPotential, SingularPotential,
                     SolveConfig, assemble, build_grid, minimize_j_omega, solve_u0,
                     solve_weak_newton)
from fraclap.verification import random_competitors, vi_slacks

op = assemble(build_grid(-1, 1, 256), 0.25)
sp = SingularPotential(2.0)
u0 = solve_u0(op, sp).solution
# the inequality slack of an inexact minimiser is about its residual times
# |v - u|_1, so the minimiser is driven to 1e-12 rather than the default 1e-10
tight = SolveConfig(tol_residual=1e-12)

print("omega          Newton its  FISTA its   |u_A - u_B|    J_min       min VI slack")
for text in ("zero", "constant:1", "sin", "bump", "bump:amp=-0.5"):
    omega = OmegaSpec.parse(text).sample(op.grid)
    a = solve_weak_newton(op, sp, omega)
    E = EnergyFunctional(op, ShiftedPotential(sp, u0), omega)
    b = minimize_j_omega(E, tight)
    slack = vi_slacks(op, sp, b.solution, omega, random_competitors(b.solution, 100)).min()
    print(f"{text:14s} {a.iterations:9d} {b.iterations:10d}   {np.max(np.abs(a.solution - b.solution)):.2e}"
          f"   {b.energy_value:+.5f}   {slack:+.1e}")

# %% The energy vanishes at the anchor and is infinite below the barrier
E = EnergyFunctional(op, ShiftedPotential(sp, u0), np.zeros(op.grid.size))
v = np.zeros(op.grid.size)
print("\nJ(u0) =", E.value(v))
v[100] = -1.01 * u0[100]
print("J below the barrier =", E.value(v))
