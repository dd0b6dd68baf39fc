"""Solvers for the torsion problem, the pure singular problem, general data
(two independent routes), and the semilinear problem.

All stopping tests use the max norm over interior nodes.  Every routine is
deterministic: fixed start vectors, fixed iteration order, no random state.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .energy import EnergyFunctional, ShiftedPotential, SingularPotential
from .exceptions import ConvergenceError, DivergenceError, PositivityCollapse
from .operator import NonlocalOperator

log = logging.getLogger(__name__)

PATHS = ("torsion", "u0", "weak_newton", "variational_min", "semilinear")


@dataclass(frozen=True)
class SolveConfig:
    tol_residual: float = 1e-10
    max_iter: int = 500
    damping: float = 0.9
    prox_tol: float = 1e-12
    relaxation: float = 0.5     # Picard weight theta for the semilinear loop
    tol_outer: float = 1e-8

    def __post_init__(self):
        for name in ("tol_residual", "prox_tol", "tol_outer"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")
        if not (0 < self.relaxation <= 1):
            raise ValueError("relaxation must lie in (0, 1]")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    final_residual: float
    path: str
    converged: bool
    residual_history: list = field(default_factory=list)
    barrier_check: Optional[np.ndarray] = None
    energy_value: Optional[float] = None
    grid: Optional[dict] = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def conv(x):
            if isinstance(x, np.ndarray):
                return x.tolist()
            if isinstance(x, dict):
                return {k: conv(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            if isinstance(x, (np.floating, np.integer, np.bool_)):
                return x.item()
            return x

        return {
            "path": self.path,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "final_residual": float(self.final_residual),
            "energy_value": None if self.energy_value is None else float(self.energy_value),
            "grid": self.grid,
            "solution": conv(self.solution),
            "residual_history": conv(self.residual_history),
            "barrier_check": conv(self.barrier_check),
            "extras": conv(self.extras),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _grid_meta(op: NonlocalOperator) -> dict:
    g = op.grid
    return {"a": g.a, "b": g.b, "n": g.n, "h": g.h, "s": op.s,
            "outside_hypotheses": op.outside_hypotheses}


def _sup(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def barriers(u1, gamma: float):
    """Sub- and supersolution built from the torsion function.

    Returns ``(lower, upper)`` with ``lower = |u1|_inf^(-g/(g+1)) u1`` and
    ``upper = ((g+1) u1)^(1/(g+1))``.
    """
    u1 = np.asarray(u1, dtype=float)
    m = float(np.max(u1))
    lower = m ** (-gamma / (gamma + 1)) * u1
    upper = ((gamma + 1) * u1) ** (1 / (gamma + 1))
    return lower, upper


def solve_torsion(op: NonlocalOperator, cfg: SolveConfig = SolveConfig()) -> SolveReport:
    """Solve ``L u = 1``."""
    m = op.grid.size
    rhs = np.ones(m)
    try:
        factor = linalg.cho_factor(op.L)
    except linalg.LinAlgError as exc:
        raise RuntimeError("operator matrix is not positive definite; assembly bug") from exc
    u = linalg.cho_solve(factor, rhs)
    history = [_sup(op.L @ u - rhs)]
    # a couple of refinement sweeps against roundoff on fine grids
    for _ in range(3):
        if history[-1] <= cfg.tol_residual:
            break
        u = u + linalg.cho_solve(factor, rhs - op.L @ u)
        history.append(_sup(op.L @ u - rhs))
    res = history[-1]
    return SolveReport(u, len(history), res, "torsion", res <= cfg.tol_residual,
                       history, grid=_grid_meta(op))


def _newton(op, rhs_fn, dfn, u, cfg, lower=None, upper=None, path="u0"):
    """Damped Newton for ``L u - f(u) = 0`` with a fraction-to-boundary rule.

    ``rhs_fn(u)`` gives ``f(u)`` and ``dfn(u)`` its (diagonal) derivative.
    Optional ``lower``/``upper`` clip every iterate.
    """
    L = op.L
    history = []
    clipped_at = []
    limited = 0
    for it in range(cfg.max_iter + 1):
        r = L @ u - rhs_fn(u)
        res = _sup(r)
        history.append(res)
        if res <= cfg.tol_residual:
            return u, it, history, clipped_at, True
        if it == cfg.max_iter:
            break
        J = L + np.diag(-dfn(u))
        delta = linalg.solve(J, -r, assume_a="pos", check_finite=False)
        neg = delta < 0
        alpha = 1.0
        if neg.any():
            alpha = min(1.0, float(np.min(cfg.damping * u[neg] / -delta[neg])))
        limited = limited + 1 if alpha < 1.0 else 0
        u_new = u + alpha * delta
        if lower is not None or upper is not None:
            proj = np.clip(u_new, lower, upper)
            if np.any(proj != u_new):
                clipped_at.append(it + 1)
            u_new = proj
        if limited >= 60 or not np.all(u_new > 0):
            rep = SolveReport(u_new, it + 1, res, path, False, history, grid=_grid_meta(op))
            raise PositivityCollapse(
                f"{path}: iterates collapse toward zero at x={op.grid.nodes[np.argmin(u_new)]:.6g}",
                rep)
        u = u_new
    rep = SolveReport(u, cfg.max_iter, history[-1], path, False, history, grid=_grid_meta(op))
    raise ConvergenceError(f"{path}: no convergence in {cfg.max_iter} iterations "
                           f"(residual {history[-1]:.3e})", rep)


def solve_u0(op: NonlocalOperator, sp: SingularPotential, cfg: SolveConfig = SolveConfig(),
             torsion: Optional[SolveReport] = None, project: bool = True) -> SolveReport:
    """Solve ``L u = u^(-gamma)`` by Newton's method inside the barrier bracket.

    Starts from the supersolution ``upper`` and clips every iterate into
    ``[lower, upper]`` (see :func:`barriers`).  With ``project=False`` only
    the fraction-to-boundary rule safeguards positivity, so the bracket is
    not enforced and can be checked independently.
    """
    g = sp.gamma
    if torsion is None:
        torsion = solve_torsion(op, cfg)
    lower, upper = barriers(torsion.solution, g)
    u, it, history, clipped_at, ok = _newton(
        op, lambda u: u ** (-g), lambda u: -g * u ** (-g - 1), upper.copy(), cfg,
        lower=lower if project else None, upper=upper if project else None, path="u0")
    late = [k for k in clipped_at if k > it - 3]
    if late:
        warnings.warn(f"u0: bracket projection active in final iterations {late}",
                      RuntimeWarning, stacklevel=2)
    slack = np.maximum(lower - u, u - upper)
    return SolveReport(u, it, history[-1], "u0", ok, history, barrier_check=slack,
                       grid=_grid_meta(op),
                       extras={"gamma": g, "lower_barrier": lower, "upper_barrier": upper,
                               "torsion": torsion.solution, "projected": project,
                               "projection_iterations": clipped_at})


def solve_weak_newton(op: NonlocalOperator, sp: SingularPotential, omega,
                      cfg: SolveConfig = SolveConfig(),
                      torsion: Optional[SolveReport] = None) -> SolveReport:
    """Solve ``L u = u^(-gamma) + omega`` by damped Newton.

    The start ``upper + L^{-1} max(omega, 0)`` is a discrete supersolution;
    steps are shortened so that every node keeps at least ``1 - damping`` of
    its previous value.
    """
    g = sp.gamma
    omega = np.asarray(omega, dtype=float)
    if torsion is None:
        torsion = solve_torsion(op, cfg)
    _, upper = barriers(torsion.solution, g)
    start = upper + linalg.solve(op.L, np.maximum(omega, 0.0), assume_a="pos")
    u, it, history, _, ok = _newton(
        op, lambda u: u ** (-g) + omega, lambda u: -g * u ** (-g - 1), start, cfg,
        path="weak_newton")
    return SolveReport(u, it, history[-1], "weak_newton", ok, history,
                       grid=_grid_meta(op), extras={"gamma": g})


def power_norm(A: np.ndarray, iters: int = 50) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite matrix (power iteration)."""
    x = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = A @ x
        lam = float(np.linalg.norm(y))
        if lam == 0:
            return 0.0
        x = y / lam
    return lam


def composite_residual(op: NonlocalOperator, shifted: ShiftedPotential, w, omega,
                       tau: Optional[float] = None, prox_tol: float = 1e-12) -> float:
    """Proximal-gradient residual ``|w - prox(w - tau grad)|_inf / tau``.

    The smooth part is ``1/2 w^T A w - h <omega, w>`` and the nonsmooth part
    ``h sum G0``.  ``omega`` is a node vector or a callable of ``w``; it
    vanishes exactly at critical points of the composite functional.
    """
    w = np.asarray(w, dtype=float)
    h = op.grid.h
    om = omega(w) if callable(omega) else np.asarray(omega, dtype=float)
    if tau is None:
        tau = 1.0 / power_norm(op.A)
    z = w - tau * (op.A @ w - h * om)
    return _sup(w - shifted.prox(z, tau * h, tol=prox_tol)) / tau


def minimize_j_omega(E: EnergyFunctional, cfg: SolveConfig = SolveConfig(),
                     v_init=None) -> SolveReport:
    """Minimise the discrete energy by accelerated proximal gradient.

    FISTA with gradient-based momentum restart; the step starts at
    ``1 / lambda_max(A)`` (power iteration) and is halved until the quadratic
    upper model holds.  Stops when the prox-gradient residual at the current
    iterate is at most ``cfg.tol_residual``.
    """
    op, h = E.op, E.h
    shifted = E.shifted
    budget = 20 * cfg.max_iter
    tau = 1.0 / power_norm(op.A)

    def f(v):
        return E.smooth_value(v)

    v = np.zeros_like(E.omega) if v_init is None else np.array(v_init, dtype=float)
    if not np.all(np.isfinite(shifted.values(v))):
        v = np.zeros_like(E.omega)
    y, t_mom = v.copy(), 1.0
    history = []
    res = math.inf
    it = 0
    for it in range(1, budget + 1):
        gy = E.smooth_grad(y)
        fy = f(y)
        while True:
            v_new = shifted.prox(y - tau * gy, tau * h, tol=cfg.prox_tol)
            d = v_new - y
            if f(v_new) <= fy + gy @ d + (d @ d) / (2 * tau) + 1e-12 * abs(fy):
                break
            tau *= 0.5
        gm = _sup(d) / tau
        if gm <= cfg.tol_residual:
            res = composite_residual(op, shifted, v_new, E.omega, tau, cfg.prox_tol)
            history.append(res)
            if res <= cfg.tol_residual:
                v = v_new
                break
        elif it % 50 == 0:
            history.append(gm)
        if (y - v_new) @ (v_new - v) > 0:
            t_mom = 1.0
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t_mom * t_mom))
        y = v_new + ((t_mom - 1) / t_next) * (v_new - v)
        v, t_mom = v_new, t_next
    else:
        res = composite_residual(op, shifted, v, E.omega, tau, cfg.prox_tol)
        rep = SolveReport(E.u0 + v, budget, res, "variational_min", False, history,
                          energy_value=E.value(v), grid=_grid_meta(op))
        raise ConvergenceError(f"variational_min: residual {res:.3e} after {budget} "
                               "proximal-gradient iterations", rep)
    J = E.value(v)
    return SolveReport(E.u0 + v, it, res, "variational_min", True, history,
                       energy_value=J, grid=_grid_meta(op),
                       extras={"v": v, "step": tau, "below_anchor": J <= 0.0})


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass
class SemilinearTerm:
    """Nonlinearity ``g(x, t)`` with growth data ``|g| <= a(x) + b |t|^p``.

    ``g`` must accept node-vector arguments ``(x, t)``.  ``a_bound`` is a
    node vector, a scalar, or a callable of ``x``.  ``primitive`` optionally
    gives ``G(x, t) = int_0^t g(x, tau) d tau``; otherwise Gauss-Legendre
    quadrature is used.
    """

    g: Callable
    a_bound: object = 0.0
    b_bound: float = 0.0
    primitive: Optional[Callable] = None
    name: str = "custom"

    def __call__(self, x, t):
        return np.asarray(self.g(x, t), dtype=float) * np.ones_like(np.asarray(t, dtype=float))

    def G1(self, x, u0, w):
        """``int_0^w g(x, u0 + tau) d tau`` nodewise."""
        x, u0, w = (np.asarray(a, dtype=float) for a in (x, u0, w))
        if self.primitive is not None:
            return self.primitive(x, u0 + w) - self.primitive(x, u0)
        nodes = 0.5 * (_GL_X[:, None] + 1.0) * w[None, :]
        vals = self(np.broadcast_to(x, nodes.shape), u0[None, :] + nodes)
        return 0.5 * w * (_GL_W @ vals)

    def audit(self, op: NonlocalOperator, probes=None) -> dict:
        """Sampled check of the growth bound; skipped when ``dim <= 2s``."""
        order = op.order
        if not order.sobolev_embedding_valid:
            return {"performed": False, "passed": None,
                    "reason": f"dim={order.dim} <= 2s={2 * order.s}: growth exponent undefined"}
        p = (order.dim + 2 * order.s) / (order.dim - 2 * order.s)
        x = op.grid.nodes
        a = self.a_bound(x) if callable(self.a_bound) else np.broadcast_to(
            np.asarray(self.a_bound, dtype=float), x.shape)
        if probes is None:
            probes = np.concatenate([-np.logspace(-3, 3, 25), [0.0], np.logspace(-3, 3, 25)])
        worst = -math.inf
        for t in probes:
            tt = np.full(x.shape, float(t))
            excess = np.abs(self(x, tt)) - (a + self.b_bound * abs(t) ** p)
            worst = max(worst, float(np.max(excess)))
        return {"performed": True, "passed": worst <= 0.0, "worst_excess": worst,
                "exponent": p}

    @classmethod
    def zero(cls):
        return cls(lambda x, t: np.zeros_like(t), 0.0, 0.0,
                   primitive=lambda x, t: np.zeros_like(t), name="zero")

    @classmethod
    def constant(cls, c: float):
        return cls(lambda x, t: np.full_like(t, c), abs(c), 0.0,
                   primitive=lambda x, t: c * t, name=f"constant({c})")

    @classmethod
    def truncated_linear(cls, lam: float, M: float):
        """``g(x, t) = lam * min(t, M)``."""
        def prim(x, t):
            t = np.asarray(t, dtype=float)
            return lam * np.where(t <= M, 0.5 * t * t, 0.5 * M * M + M * (t - M))

        return cls(lambda x, t: lam * np.minimum(t, M), abs(lam) * max(1.0, abs(M)), abs(lam),
                   primitive=prim, name=f"truncated_linear({lam},{M})")


def semilinear_potential(op: NonlocalOperator, shifted: ShiftedPotential, term: SemilinearTerm,
                         w) -> float:
    """The C^1 part ``-h sum_i G1(x_i, w_i)`` of ``F`` (the primitive of ``-g``)."""
    return -op.grid.h * float(term.G1(op.grid.nodes, shifted.u0, w).sum())


def semilinear_energy(op: NonlocalOperator, shifted: ShiftedPotential, term: SemilinearTerm,
                      w) -> float:
    """``F(w) = 1/2 w^T A w + h sum G0(w) - h sum G1(x, w)``."""
    w = np.asarray(w, dtype=float)
    gv = shifted.values(w)
    if not np.all(np.isfinite(gv)):
        return math.inf
    return (0.5 * float(w @ (op.A @ w)) + op.grid.h * float(gv.sum())
            + semilinear_potential(op, shifted, term, w))


def solve_semilinear(op: NonlocalOperator, sp: SingularPotential, term: SemilinearTerm,
                     cfg: SolveConfig = SolveConfig(),
                     u0_report: Optional[SolveReport] = None) -> SolveReport:
    """Damped Picard iteration ``u <- (1-theta) u + theta M(g(x, u))``.

    ``M(omega)`` is the minimiser of the energy with frozen data.  Returns the
    last inner minimiser, ``w = u - u0``, and the composite residual of ``F``
    at ``w``.
    """
    audit = term.audit(op)
    if audit["performed"] and not audit["passed"]:
        warnings.warn(f"growth bound violated on probes (excess {audit['worst_excess']:.3g})",
                      RuntimeWarning, stacklevel=2)
    if u0_report is None:
        u0_report = solve_u0(op, sp, cfg)
    u0 = u0_report.solution
    shifted = ShiftedPotential(sp, u0)
    x = op.grid.nodes
    theta = cfg.relaxation

    u = u0.copy()
    v = np.zeros_like(u0)
    history = []
    growing = 0
    inner_total = 0
    for k in range(1, cfg.max_iter + 1):
        E = EnergyFunctional(op, shifted, term(x, u))
        inner = minimize_j_omega(E, cfg, v_init=v)
        inner_total += inner.iterations
        m_u = inner.solution
        v = m_u - u0
        step = theta * _sup(m_u - u)
        history.append(step)
        if step <= cfg.tol_outer:
            break
        growing = growing + 1 if len(history) > 1 and step > history[-2] else 0
        if growing >= 10:
            rep = SolveReport(m_u, k, step, "semilinear", False, history, grid=_grid_meta(op))
            raise DivergenceError("semilinear: Picard increments grew for 10 consecutive steps",
                                  rep)
        u = (1 - theta) * u + theta * m_u
    else:
        rep = SolveReport(m_u, cfg.max_iter, history[-1], "semilinear", False, history,
                          grid=_grid_meta(op))
        raise ConvergenceError("semilinear: outer iteration budget exhausted", rep)

    w = m_u - u0
    f_res = composite_residual(op, shifted, w, lambda w: term(x, u0 + w), prox_tol=cfg.prox_tol)
    return SolveReport(m_u, k, history[-1], "semilinear", True, history,
                       energy_value=semilinear_energy(op, shifted, term, w),
                       grid=_grid_meta(op),
                       extras={"w": w, "u0": u0, "F_residual": f_res, "growth_audit": audit,
                               "inner_iterations": inner_total, "term": term.name})
