"""Finite-difference solvers and property checks for the singular fractional
Dirichlet problem ``(-Delta)^s u = u^(-gamma) + omega`` on an interval."""

__version__ = "0.1.0"

from .grid import Grid, build_grid
from .exceptions import (BracketError, ConvergenceError, DivergenceError, GridMismatchError,
                         PositivityCollapse, QuadratureError)
from .operator import (FractionalOrder, NonlocalOperator, assemble, far_weights,
                       gagliardo_seminorm, normalizing_constant, normalizing_constant_quad,
                       weak_residual)
from .energy import (EnergyFunctional, ShiftedPotential, SingularPotential, dg0, g0, j_omega,
                     phi, prox_g0)
from .solvers import (SemilinearTerm, SolveConfig, SolveReport, barriers, composite_residual,
                      minimize_j_omega, semilinear_energy, semilinear_potential,
                      solve_semilinear, solve_torsion,
                      solve_u0, solve_weak_newton)
from .profiles import OmegaSpec
from .verification import (BatteryConfig, CheckReport, barrier_refinement, check_anchor,
                           check_barriers, check_boundary_sense, check_comparison,
                           check_constant, check_decomposition, check_equivalence,
                           check_gradient, convergence_study, run_battery, solve_family,
                           torsion_oracle)
