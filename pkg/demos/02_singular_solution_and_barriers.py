"""The pure singular problem L u = u^(-gamma) and its barrier sandwich.

Run: python3 demos/02_singular_solution_and_barriers.py
"""
import numpy as np

from fraclap import SingularPotential, assemble, build_grid, solve_torsion, solve_u0
from fraclap.verification import check_barriers

op = assemble(build_grid(-1, 1, 512), 0.5)
torsion = solve_torsion(op)

# %% Newton from the supersolution, without projecting onto the bracket, so
# that the sandwich below is an independent check
print("gamma  iters  residual   u0(0)   min gap to lower  min gap to upper")
for gamma in (0.5, 1.0, 2.0, 4.0):
    rep = solve_u0(op, SingularPotential(gamma), torsion=torsion, project=False)
    u = rep.solution
    lo, hi = rep.extras["lower_barrier"], rep.extras["upper_barrier"]
    print(f"{gamma:5.1f}  {rep.iterations:5d}  {rep.final_residual:.1e}  {u[255]:.4f}"
          f"   {np.min(u - lo):.3e}        {np.min(hi - u):.3e}")

# %% gamma = 1, s = 1/2: sup u1 = 1, so 1 <= u0(0) <= sqrt(2)
rep = solve_u0(op, SingularPotential(1.0), torsion=torsion, project=False)
print("\nu0(0) =", rep.solution[255], " bracket [1, 1.41421]")
chk = check_barriers(rep, torsion, 1.0)
print(chk.name, "passed" if chk.passed else "FAILED", "worst violation", chk.worst_slack)
