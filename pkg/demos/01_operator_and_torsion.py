"""Discrete fractional Laplacian on (-1, 1) and the torsion function.

Run: python3 demos/01_operator_and_torsion.py
"""
import math

import numpy as np

from fraclap import (FractionalOrder, assemble, build_grid, gagliardo_seminorm,
                     normalizing_constant, normalizing_constant_quad, solve_torsion)
from fraclap.verification import torsion_oracle

# %% The normalising constant, by its Gamma-function formula and by quadrature
for s in (0.25, 0.5, 0.75):
    o = FractionalOrder(s)
    print(f"s={s}: c = {normalizing_constant(o):.12f}   quadrature {normalizing_constant_quad(o):.12f}")
print("1/pi =", 1 / math.pi)

# %% Assemble on 64 cells; L is a symmetric M-matrix
op = assemble(build_grid(-1, 1, 64), 0.5)
off = op.L - np.diag(np.diag(op.L))
print("\nsymmetric:", np.allclose(op.L, op.L.T), " off-diagonal <= 0:", bool(np.all(off <= 0)))
print("row excess = tail + boundary cell:",
      np.allclose(np.diag(op.L) - np.abs(off).sum(1), op.tail + op.boundary_cell))

# %% Torsion: L u = 1, compared with C ((1 + x)(1 - x))^s
print("\n   n    interior error   u(0)")
for n in (128, 256, 512, 1024):
    op = assemble(build_grid(-1, 1, n), 0.5)
    u = solve_torsion(op).solution
    x = op.grid.nodes
    err = np.max(np.abs(u - torsion_oracle(x, 0.5))[np.abs(x) <= 0.5])
    print(f"{n:5d}    {err:.3e}        {u[n // 2 - 1]:.6f}")

# %% Other orders: the closed form holds for every s on an interval
for s in (0.25, 0.75):
    op = assemble(build_grid(-1, 1, 512), s)
    u = solve_torsion(op).solution
    x = op.grid.nodes
    err = np.max(np.abs(u - torsion_oracle(x, s))[np.abs(x) <= 0.5])
    print(f"s={s}: interior error at n=512 {err:.3e}")

# %% Discrete Gagliardo seminorm of (1 - x^2)^2 (exact value 8/3 at s = 1/2)
for n in (64, 256, 1024):
    op = assemble(build_grid(-1, 1, n), 0.5)
    print(f"n={n:5d}: [u] = {gagliardo_seminorm(op, (1 - op.grid.nodes**2) ** 2):.6f}")
