"""Executable checks of the qualitative results at discrete scale.

Each check returns a :class:`CheckReport` whose ``passed`` flag is exactly
``worst_slack <= tolerance``.  Checks bundling several assertions with
different tolerances report the worst *normalised* slack (metric divided
by its tolerance) against ``tolerance = 1``; the raw metrics are kept in
``data``.
"""
from __future__ import annotations

import math
import platform
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .energy import EnergyFunctional, ShiftedPotential, SingularPotential
from .exceptions import GridMismatchError
from .grid import build_grid
from .operator import (FractionalOrder, NonlocalOperator, assemble, gagliardo_seminorm,
                       normalizing_constant, normalizing_constant_quad)
from .profiles import BUMP, NEG_BUMP, ONE, SIN, ZERO, OmegaSpec
from .solvers import (SemilinearTerm, SolveConfig, SolveReport, barriers, composite_residual,
                      minimize_j_omega, solve_semilinear, solve_torsion, solve_u0,
                      solve_weak_newton)

BARRIER_TOL = 5e-3
EQUIVALENCE_TOL = 1e-6
VI_TOL = 1e-9
MONOTONE_TOL = 1e-9
DECOMPOSITION_TOL = 1e-6
BOUNDARY_RATIO = 0.05
GRADIENT_TOL = 1e-6
CONSTANT_TOL = 1e-8

DEFAULT_S = (0.25, 0.5, 0.75)
DEFAULT_GAMMA = (0.5, 1.0, 2.0, 4.0)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_slack: float
    tolerance: float
    location: Optional[float] = None
    refinement_table: Optional[list] = None
    notes: str = ""
    data: dict = field(default_factory=dict)

    @classmethod
    def from_slack(cls, name, worst_slack, tolerance, **kw) -> "CheckReport":
        worst_slack = float(worst_slack)
        return cls(name, bool(worst_slack <= tolerance), worst_slack, float(tolerance), **kw)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst_slack": self.worst_slack,
                "tolerance": self.tolerance, "location": self.location,
                "refinement_table": self.refinement_table, "notes": self.notes,
                "data": _plain(self.data)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _same_grid(*reports: SolveReport):
    metas = [(r.grid["a"], r.grid["b"], r.grid["n"]) for r in reports]
    if len(set(metas)) != 1:
        raise GridMismatchError(f"reports live on different grids: {metas}")


def _operator_for(report: SolveReport) -> NonlocalOperator:
    g = report.grid
    return assemble(build_grid(g["a"], g["b"], g["n"]), g["s"])


# --------------------------------------------------------------------------
# barrier sandwich

def check_barriers(u0_report: SolveReport, torsion_report: SolveReport, gamma: float,
                   tol: float = BARRIER_TOL) -> CheckReport:
    """``lower - slack <= u0 <= upper + slack`` nodewise; worst violation recorded."""
    _same_grid(u0_report, torsion_report)
    lower, upper = barriers(torsion_report.solution, gamma)
    u0 = u0_report.solution
    signed = np.maximum(lower - u0, u0 - upper)
    i = int(np.argmax(signed))
    violation = max(0.0, float(signed[i]))
    g = u0_report.grid
    x = g["a"] + g["h"] * (i + 1)
    return CheckReport.from_slack(
        "barriers", violation, tol, location=x,
        notes=f"s={g['s']}, gamma={gamma}, n={g['n']}",
        data={"s": g["s"], "gamma": gamma, "n": g["n"],
              "closest_approach": float(signed[i]),
              "u0_residual": u0_report.final_residual,
              "u0_converged": u0_report.converged,
              "projected": bool(u0_report.extras.get("projected", False)),
              "lower_gap_min": float(np.min(u0 - lower)),
              "upper_gap_min": float(np.min(upper - u0))})


def barrier_refinement(s: float, gamma: float, refinements=(512, 1024), a=-1.0, b=1.0,
                       cfg: SolveConfig = SolveConfig(), tol: float = BARRIER_TOL,
                       roundoff: float = 1e-12) -> CheckReport:
    """Sandwich violations on nested grids, ``u0`` solved without projection.

    Passes when every violation is within ``tol`` and the violation on the
    finest grid does not exceed the coarsest one (up to ``roundoff``).
    """
    table = []
    for n in refinements:
        op = assemble(build_grid(a, b, n), s)
        tors = solve_torsion(op, cfg)
        u0 = solve_u0(op, SingularPotential(gamma), cfg, torsion=tors, project=False)
        rep = check_barriers(u0, tors, gamma, tol)
        table.append((n, rep.worst_slack))
    viols = [v for _, v in table]
    # violations normalised by tol; a finest-grid violation above the coarsest
    # one (beyond roundoff) fails outright
    worst = max(viols) / tol
    if viols[-1] > viols[0] + roundoff:
        worst = max(worst, math.inf)
    return CheckReport.from_slack(
        "barrier_refinement", worst, 1.0, refinement_table=table,
        notes=f"s={s}, gamma={gamma}; violations normalised by {tol:g}",
        data={"s": s, "gamma": gamma, "violations": viols})


# --------------------------------------------------------------------------
# comparison

def check_comparison(op: NonlocalOperator, sp: SingularPotential, omega_lo, omega_hi,
                     cfg: SolveConfig = SolveConfig(), tol: float = MONOTONE_TOL,
                     torsion: Optional[SolveReport] = None) -> CheckReport:
    """Ordered data give ordered solutions: ``u_lo <= u_hi + tol``."""
    omega_lo = np.asarray(omega_lo, dtype=float)
    omega_hi = np.asarray(omega_hi, dtype=float)
    if np.any(omega_lo > omega_hi):
        raise ValueError("check_comparison needs omega_lo <= omega_hi nodewise")
    if torsion is None:
        torsion = solve_torsion(op, cfg)
    u_lo = solve_weak_newton(op, sp, omega_lo, cfg, torsion=torsion).solution
    u_hi = solve_weak_newton(op, sp, omega_hi, cfg, torsion=torsion).solution
    diff = u_lo - u_hi
    i = int(np.argmax(diff))
    gap = u_hi - u_lo
    return CheckReport.from_slack(
        "comparison", float(diff[i]), tol, location=float(op.grid.nodes[i]),
        notes=f"s={op.s}, gamma={sp.gamma}, n={op.grid.n}",
        data={"s": op.s, "gamma": sp.gamma, "n": op.grid.n,
              "min_gap": float(gap.min()), "max_gap": float(gap.max()),
              "x_max_gap": float(op.grid.nodes[int(np.argmax(gap))])})


# --------------------------------------------------------------------------
# equivalence of the weak and variational formulations

def vi_slacks(op: NonlocalOperator, sp: SingularPotential, u, omega, competitors) -> np.ndarray:
    """Discrete variational-inequality slack for each competitor ``v``.

    ``(v - u)^T A u - h <u^(-gamma), v - u> - h <omega, v - u>``, which must be
    nonnegative at a solution.
    """
    u = np.asarray(u, dtype=float)
    grad = op.A @ u - op.grid.h * (u ** (-sp.gamma) + np.asarray(omega, dtype=float))
    return np.array([float((v - u) @ grad) for v in competitors])


def random_competitors(u, count: int = 100, seed: int = 0, include_identity: bool = True):
    """Compactly supported perturbations ``v = max(u + phi, 0)``.

    Each ``phi`` is supported on a random window of at most a quarter of the
    nodes, away from nothing in particular: windows may touch the first or
    last interior node, never the exterior.
    """
    u = np.asarray(u, dtype=float)
    rng = np.random.default_rng(seed)
    m = u.size
    scale = float(np.max(np.abs(u)))
    out = [u.copy()] if include_identity else []
    while len(out) < count:
        width = int(rng.integers(1, max(m // 4, 1) + 1))
        start = int(rng.integers(0, m - width + 1))
        phi = np.zeros(m)
        phi[start:start + width] = rng.uniform(-1.0, 1.0, width) * scale
        out.append(np.maximum(u + phi, 0.0))
    return out


def check_equivalence(op: NonlocalOperator, sp: SingularPotential, omega,
                      cfg: SolveConfig = SolveConfig(), tol: float = EQUIVALENCE_TOL,
                      vi_tol: float = VI_TOL, competitors: int = 100, seed: int = 0,
                      certify_tol: float = 1e-12, u0_report: Optional[SolveReport] = None,
                      torsion: Optional[SolveReport] = None, label: str = "") -> CheckReport:
    """Weak Newton and energy minimisation agree, and both satisfy the
    variational inequality on random admissible competitors.

    The minimiser is certified at ``certify_tol``: the inequality slack of an
    inexact minimiser is bounded by its residual times ``|v - u|_1``.
    """
    omega = np.asarray(omega, dtype=float)
    if torsion is None:
        torsion = solve_torsion(op, cfg)
    if u0_report is None:
        u0_report = solve_u0(op, sp, cfg, torsion=torsion)
    u_a = solve_weak_newton(op, sp, omega, cfg, torsion=torsion).solution
    E = EnergyFunctional(op, ShiftedPotential(sp, u0_report.solution), omega)
    min_cfg = SolveConfig(**{**cfg.__dict__, "tol_residual": min(cfg.tol_residual, certify_tol)})
    mrep = minimize_j_omega(E, min_cfg)
    u_b = mrep.solution
    diff = np.abs(u_a - u_b)
    i = int(np.argmax(diff))

    comp_a = random_competitors(u_a, competitors, seed)
    comp_b = random_competitors(u_b, competitors, seed)
    sl_a = vi_slacks(op, sp, u_a, omega, comp_a)
    sl_b = vi_slacks(op, sp, u_b, omega, comp_b)
    vi_worst = -min(sl_a.min(), sl_b.min())   # violation is a negative slack
    worst = max(float(diff[i]) / tol, vi_worst / vi_tol)
    return CheckReport.from_slack(
        "equivalence", worst, 1.0, location=float(op.grid.nodes[i]),
        notes=f"s={op.s}, gamma={sp.gamma}, n={op.grid.n}, omega={label}",
        data={"s": op.s, "gamma": sp.gamma, "n": op.grid.n, "omega": label,
              "cross_path_sup": float(diff[i]), "cross_path_tol": tol,
              "vi_min_slack_weak": float(sl_a.min()), "vi_min_slack_variational": float(sl_b.min()),
              "vi_tol": vi_tol, "identity_slack": float(sl_b[0]),
              "energy_at_min": mrep.energy_value,
              "energy_at_anchor": E.value_at_anchor,
              "min_iterations": mrep.iterations,
              "anchor_displacement": float(np.max(np.abs(u_b - u0_report.solution)))})


def check_anchor(op: NonlocalOperator, sp: SingularPotential, cfg: SolveConfig = SolveConfig(),
                 tol: float = EQUIVALENCE_TOL, u0_report: Optional[SolveReport] = None
                 ) -> CheckReport:
    """With zero data the minimiser stays at the anchor and ``J(u0) = 0``."""
    if u0_report is None:
        u0_report = solve_u0(op, sp, cfg)
    E = EnergyFunctional(op, ShiftedPotential(sp, u0_report.solution), np.zeros(op.grid.size))
    rep = minimize_j_omega(E, cfg)
    disp = float(np.max(np.abs(rep.extras["v"])))
    j0 = E.value_at_anchor
    worst = max(disp / tol, abs(j0) / np.finfo(float).eps)
    return CheckReport.from_slack(
        "anchor", worst, 1.0, notes=f"s={op.s}, gamma={sp.gamma}, n={op.grid.n}",
        data={"s": op.s, "gamma": sp.gamma, "n": op.grid.n, "displacement": disp,
              "J_at_anchor": j0, "energy_at_min": rep.energy_value})


# --------------------------------------------------------------------------
# gradient consistency

def fd_gradient(fun, v, delta: float) -> np.ndarray:
    """Central-difference gradient of a stack-evaluated ``fun`` at ``v``."""
    E = delta * np.eye(v.size)
    return (fun(v + E) - fun(v - E)) / (2 * delta)


def check_gradient(op: NonlocalOperator, sp: SingularPotential, omega,
                   u0_report: Optional[SolveReport] = None, points: int = 100, seed: int = 0,
                   rel_step: float = 1e-6, tol: float = GRADIENT_TOL,
                   cfg: SolveConfig = SolveConfig()) -> CheckReport:
    """Central differences of the energy against its analytic gradient.

    Points are drawn strictly inside the barrier, ``v = u0 * U(-0.5, 1)``.
    At each the full finite-difference gradient (step ``rel_step *
    max(1, |v|_inf)``) is compared with the analytic one in the relative
    Euclidean norm, separately for the smooth part ``1/2 v^T A v - h <omega, v>``
    and for the whole energy.
    """
    if u0_report is None:
        u0_report = solve_u0(op, sp, cfg)
    u0 = u0_report.solution
    E = EnergyFunctional(op, ShiftedPotential(sp, u0), np.asarray(omega, dtype=float))
    rng = np.random.default_rng(seed)
    worst = {"smooth": 0.0, "full": 0.0}
    where = {"smooth": None, "full": None}
    for k in range(points):
        v = u0 * rng.uniform(-0.5, 1.0, u0.size)
        delta = rel_step * max(1.0, float(np.max(np.abs(v))))
        for part, fun, grad in (("smooth", E.smooth_values, E.smooth_grad),
                                ("full", E.values, E.gradient)):
            an = grad(v)
            err = float(np.linalg.norm(fd_gradient(fun, v, delta) - an) / np.linalg.norm(an))
            if err > worst[part]:
                worst[part], where[part] = err, k
    return CheckReport.from_slack(
        "gradient", max(worst.values()), tol,
        notes=f"s={op.s}, gamma={sp.gamma}, n={op.grid.n}",
        data={"s": op.s, "gamma": sp.gamma, "n": op.grid.n, "points": points,
              "smooth_rel_error": worst["smooth"], "full_rel_error": worst["full"],
              "worst_point": where})


# --------------------------------------------------------------------------
# semilinear decomposition

def _boundary_fit(op: NonlocalOperator, w) -> dict:
    d = op.grid.boundary_dist
    w = np.abs(np.asarray(w, dtype=float))
    sel = (d <= 0.1 * (op.grid.b - op.grid.a)) & (w > 0)
    if sel.sum() < 3:
        return {"exponent": None, "constant": None}
    slope, icpt = np.polyfit(np.log(d[sel]), np.log(w[sel]), 1)
    return {"exponent": float(slope), "constant": float(math.exp(icpt)),
            "sup_ratio_to_dist_s": float(np.max(w[sel] / d[sel] ** op.s))}


def check_decomposition(semilinear_report: SolveReport, u0_report: SolveReport,
                        sp: SingularPotential, term: SemilinearTerm,
                        cfg: SolveConfig = SolveConfig(), tol: float = DECOMPOSITION_TOL,
                        op: Optional[NonlocalOperator] = None) -> CheckReport:
    """``w = u - u0`` is a critical point of ``F`` and frozen data reproduce ``u``.

    The boundary-decay fit ``|w| ~ C d^p`` is recorded, never asserted.
    """
    _same_grid(semilinear_report, u0_report)
    if op is None:
        op = _operator_for(u0_report)
    u = semilinear_report.solution
    u0 = u0_report.solution
    w = u - u0
    x = op.grid.nodes
    shifted = ShiftedPotential(sp, u0)
    f_res = composite_residual(op, shifted, w, lambda w: term(x, u0 + w), prox_tol=cfg.prox_tol)
    frozen = solve_weak_newton(op, sp, term(x, u), cfg).solution
    resolve = float(np.max(np.abs(frozen - u)))
    worst = max(f_res / tol, resolve / tol)
    return CheckReport.from_slack(
        "decomposition", worst, 1.0,
        notes=f"s={op.s}, gamma={sp.gamma}, n={op.grid.n}, g={term.name}",
        data={"s": op.s, "gamma": sp.gamma, "n": op.grid.n, "term": term.name,
              "F_residual": f_res, "frozen_resolve_sup": resolve, "tol": tol,
              "w_sup": float(np.max(np.abs(w))), "boundary_fit": _boundary_fit(op, w),
              "picard_steps": semilinear_report.iterations,
              "growth_audit": semilinear_report.extras.get("growth_audit")})


# --------------------------------------------------------------------------
# weak boundary sense

def solve_family(s: float, gamma: float, refinements=(128, 256, 512, 1024),
                 omega: OmegaSpec = ZERO, a=-1.0, b=1.0,
                 cfg: SolveConfig = SolveConfig()) -> list:
    """Solutions of the singular problem on nested grids."""
    out = []
    sp = SingularPotential(gamma)
    for n in refinements:
        op = assemble(build_grid(a, b, n), s)
        tors = solve_torsion(op, cfg)
        if omega.kind == "zero":
            rep = solve_u0(op, sp, cfg, torsion=tors)
        else:
            rep = solve_weak_newton(op, sp, omega.sample(op.grid), cfg, torsion=tors)
        rep.extras["gamma"] = gamma
        out.append(rep)
    return out


def check_boundary_sense(family: Sequence[SolveReport], epsilons=(0.1,),
                         ratio_tol: float = BOUNDARY_RATIO) -> CheckReport:
    """Seminorms of ``(u - eps)^+`` stay bounded across refinements.

    Asserts ``max/min - 1 <= ratio_tol`` over the family for each ``eps``
    (which bounds every successive ratio as well); the seminorm of ``u``
    itself is recorded only.
    """
    table = []
    full = []
    per_eps = {float(e): [] for e in epsilons}
    for rep in family:
        op = _operator_for(rep)
        u = rep.solution
        row = {"n": rep.grid["n"], "seminorm_u": gagliardo_seminorm(op, u)}
        for e in epsilons:
            val = gagliardo_seminorm(op, np.maximum(u - e, 0.0))
            per_eps[float(e)].append(val)
            row[f"eps={e:g}"] = val
        full.append(row["seminorm_u"])
        table.append(row)
    spread = {}
    worst = 0.0
    for e, vals in per_eps.items():
        vals = np.array(vals)
        if np.all(vals == 0):
            spread[e] = 0.0
            continue
        r = float(vals.max() / vals.min() - 1) if vals.min() > 0 else math.inf
        spread[e] = r
        worst = max(worst, r)
    g = family[0].grid
    return CheckReport.from_slack(
        "boundary_sense", worst, ratio_tol, refinement_table=table,
        notes=f"s={g['s']}, gamma={family[0].extras.get('gamma')}",
        data={"s": g["s"], "gamma": family[0].extras.get("gamma"), "spread": spread,
              "seminorm_u_growth": float(full[-1] / full[0] - 1)})


# --------------------------------------------------------------------------
# discretisation convergence

def torsion_oracle(x, s: float, a: float = -1.0, b: float = 1.0):
    """Exact torsion function of ``(a, b)``: ``C ((x - a)(b - x))^s``."""
    from scipy.special import gamma as G
    x = np.asarray(x, dtype=float)
    C = G(0.5) / (4.0**s * G(0.5 + s) * G(1 + s))
    return C * np.clip((x - a) * (b - x), 0, None) ** s


def convergence_study(s: float, gamma: float = 1.0, refinements=(256, 512, 1024),
                      a: float = -1.0, b: float = 1.0, window: float = 0.5,
                      min_order: float = 0.5, cfg: SolveConfig = SolveConfig()) -> CheckReport:
    """Refinement study of the torsion solve (and, recorded only, of ``u0``).

    For ``s = 1/2`` the error against the closed form on the central window
    ``|x - mid| <= window * (b - a)/2`` must decrease monotonically with a
    fitted order of at least ``min_order``.  For other ``s`` successive
    nested-grid differences must decrease.
    """
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    sols, u0s, grids = [], [], []
    for n in refinements:
        grid = build_grid(a, b, n)
        op = assemble(grid, s)
        tors = solve_torsion(op, cfg)
        sols.append(tors.solution)
        u0s.append(solve_u0(op, SingularPotential(gamma), cfg, torsion=tors).solution)
        grids.append(grid)
    table = []
    oracle_err = []
    for grid, u in zip(grids, sols):
        sel = np.abs(grid.nodes - mid) <= window * half
        e = float(np.max(np.abs(u - torsion_oracle(grid.nodes, s, a, b))[sel]))
        oracle_err.append(e)
    cauchy, cauchy_u0 = [], []
    for k in range(len(grids) - 1):
        idx = grids[k].coarse_index(grids[k + 1])
        cauchy.append(float(np.max(np.abs(sols[k + 1][idx] - sols[k]))))
        cauchy_u0.append(float(np.max(np.abs(u0s[k + 1][idx] - u0s[k]))))
    for k, n in enumerate(refinements):
        table.append({"n": n, "oracle_error": oracle_err[k],
                      "cauchy": cauchy[k - 1] if k else None,
                      "cauchy_u0": cauchy_u0[k - 1] if k else None})

    if s == 0.5:
        errs = np.array(oracle_err)
        order = float(-np.polyfit(np.log(refinements), np.log(errs), 1)[0])
        monotone = bool(np.all(np.diff(errs) < 0))
        worst = max(0.0 if monotone else 1.0 + float(np.max(np.diff(errs) / errs[:-1])),
                    min_order / order if order > 0 else math.inf)
        name, data = "convergence_oracle", {"order": order, "monotone": monotone}
    else:
        c = np.array(cauchy)
        ratios = c[1:] / c[:-1]
        worst = float(np.max(ratios)) if ratios.size else 0.0
        name, data = "convergence_cauchy", {"contraction": ratios.tolist(),
                                            "order": float(np.log2(1 / worst)) if 0 < worst else None}
    data.update({"s": s, "gamma": gamma, "errors": oracle_err, "cauchy": cauchy})
    # for the Cauchy branch ``worst`` is the largest contraction ratio, which
    # must stay below one; equality to one is not a contraction
    if s != 0.5 and worst >= 1.0:
        worst = max(worst, 1.0 + 1e-12)
    return CheckReport.from_slack(name, worst, 1.0, refinement_table=table, notes=f"s={s}",
                                  data=data)


# --------------------------------------------------------------------------
# normalising constant

def check_constant(dims=(1, 2), orders=(0.25, 0.5, 0.75), tol: float = CONSTANT_TOL) -> CheckReport:
    rows = []
    worst = 0.0
    for N in dims:
        for s in orders:
            o = FractionalOrder(s, N)
            c1, c2 = normalizing_constant(o), normalizing_constant_quad(o)
            rel = abs(c1 - c2) / abs(c1)
            rows.append({"N": N, "s": s, "gamma_formula": c1, "quadrature": c2, "rel": rel})
            worst = max(worst, rel)
    pi_err = abs(normalizing_constant(0.5) - 1 / math.pi)
    worst_norm = max(worst / tol, pi_err / 1e-10)
    return CheckReport.from_slack("normalizing_constant", worst_norm, 1.0, refinement_table=rows,
                                  data={"max_rel": worst, "c_1_half_minus_inv_pi": pi_err})


# --------------------------------------------------------------------------
# battery

@dataclass(frozen=True)
class BatteryConfig:
    s_values: tuple = DEFAULT_S
    gamma_values: tuple = DEFAULT_GAMMA
    a: float = -1.0
    b: float = 1.0
    n: int = 256
    barrier_refinements: tuple = (512, 1024)
    boundary_refinements: tuple = (128, 256, 512, 1024)
    convergence_refinements: tuple = (256, 512, 1024)
    competitors: int = 100
    gradient_points: int = 100
    decomposition_lambda: float = 0.1
    decomposition_M: float = 10.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}


def _cell_checks(s, gamma, bc: BatteryConfig, cfg: SolveConfig):
    out = []
    grid = build_grid(bc.a, bc.b, bc.n)
    op = assemble(grid, s)
    sp = SingularPotential(gamma)
    tors = solve_torsion(op, cfg)
    u0 = solve_u0(op, sp, cfg, torsion=tors)
    out.append(barrier_refinement(s, gamma, bc.barrier_refinements, bc.a, bc.b, cfg))
    out.append(check_anchor(op, sp, cfg, u0_report=u0))
    for spec, label in ((ZERO, "zero"), (ONE, "one"), (SIN, "sin"), (BUMP, "bump"),
                        (NEG_BUMP, "neg_bump")):
        out.append(check_equivalence(op, sp, spec.sample(grid), cfg, competitors=bc.competitors,
                                     seed=bc.seed, u0_report=u0, torsion=tors, label=label))
    for lo, hi, label in ((ZERO, ONE, "zero<=one"), (ZERO, BUMP, "zero<=bump"),
                          (NEG_BUMP, ZERO, "neg_bump<=zero"), (BUMP, BUMP, "bump<=bump")):
        rep = check_comparison(op, sp, lo.sample(grid), hi.sample(grid), cfg, torsion=tors)
        rep.notes += f", {label}"
        rep.data["pair"] = label
        out.append(rep)
    # omega enters the energy linearly; one sign-definite bump exercises it
    rep = check_gradient(op, sp, BUMP.sample(grid), u0, bc.gradient_points, bc.seed, cfg=cfg)
    rep.notes += ", omega=bump"
    rep.data["omega"] = "bump"
    out.append(rep)
    return out


def run_battery(bc: BatteryConfig = BatteryConfig(), cfg: SolveConfig = SolveConfig(),
                progress=None, workers: int = 1) -> dict:
    """Run every check over the ``(s, gamma)`` matrix; returns a JSON-ready dict.

    Cells may run concurrently (``workers > 1``); results are always
    aggregated in matrix order.
    """
    cells = [(s, g) for s in bc.s_values for g in bc.gamma_values]

    def run_cell(cell):
        if progress:
            progress(f"cell s={cell[0]} gamma={cell[1]}")
        return _cell_checks(cell[0], cell[1], bc, cfg)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]
    checks = [c for cell in results for c in cell]

    if progress:
        progress("global checks")
    checks.append(check_constant())
    for s in bc.s_values:
        checks.append(convergence_study(s, 1.0, bc.convergence_refinements, bc.a, bc.b, cfg=cfg))
    if 0.5 in bc.s_values and 4.0 in bc.gamma_values:
        fam = solve_family(0.5, 4.0, bc.boundary_refinements, a=bc.a, b=bc.b, cfg=cfg)
        checks.append(check_boundary_sense(fam, (0.1,)))
    term = SemilinearTerm.truncated_linear(bc.decomposition_lambda, bc.decomposition_M)
    for s in bc.s_values:
        op = assemble(build_grid(bc.a, bc.b, bc.n), s)
        sp = SingularPotential(1.0)
        u0 = solve_u0(op, sp, cfg)
        sl = solve_semilinear(op, sp, term, cfg, u0_report=u0)
        checks.append(check_decomposition(sl, u0, sp, term, cfg, op=op))

    return {
        "checks": [c.to_dict() for c in checks],
        "summary": {"total": len(checks), "passed": sum(c.passed for c in checks),
                    "failed": [c.name + " (" + c.notes + ")" for c in checks if not c.passed]},
        "config": {"battery": bc.to_dict(), "solver": dict(cfg.__dict__)},
        "versions": {"fraclap": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }


def summary_table(result: dict) -> str:
    """Human-readable one-line-per-check summary."""
    lines = [f"{'check':<22} {'pass':<5} {'slack':>12} {'tol':>9}  notes"]
    for c in result["checks"]:
        lines.append(f"{c['name']:<22} {'yes' if c['passed'] else 'NO':<5} "
                     f"{c['worst_slack']:>12.4e} {c['tolerance']:>9.2e}  {c['notes']}")
    s = result["summary"]
    lines.append(f"{s['passed']}/{s['total']} checks passed")
    return "\n".join(lines)
