"""Singular potential, its anchored convex shift, and the discrete energy.

Extended-real values use IEEE ``+inf`` (``math.inf``); every routine here
short-circuits before an ``inf - inf`` can form, so NaN never escapes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BracketError
from .operator import NonlocalOperator

INF = math.inf

_SERIES_RADIUS = 0.05
_SERIES_TERMS = 24


@dataclass(frozen=True)
class SingularPotential:
    """``Phi(t) = -int_1^t tau^(-gamma) d tau`` for ``t >= 0``, ``+inf`` for ``t < 0``."""

    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive real, got {self.gamma}")

    def value(self, t):
        """Vectorised ``Phi``; returns a float for scalar input."""
        t = np.asarray(t, dtype=float)
        g = self.gamma
        out = np.full(t.shape, INF)
        pos = t > 0
        tp = t[pos]
        if g == 1.0:
            out[pos] = -np.log(tp)
        else:
            out[pos] = (1.0 - tp ** (1.0 - g)) / (1.0 - g)
        if g < 1.0:
            out[t == 0] = 1.0 / (1.0 - g)
        return out[()] if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return -t ** (-self.gamma)


def phi(sp: SingularPotential, t: float) -> float:
    return float(sp.value(t))


def _shift_series(r, gamma):
    # r - ((1+r)^(1-g) - 1)/(1-g) = sum_{k>=2} (-1)^k g(g+1)...(g+k-2)/(k-1)! r^k/k
    out = np.zeros_like(r)
    coef = gamma
    term_r = r * r
    for k in range(2, _SERIES_TERMS + 2):
        if k > 2:
            coef *= -(gamma + k - 2) / (k - 1)
            term_r = term_r * r
        out += coef * term_r / k
    return out


@dataclass(frozen=True, eq=False)
class ShiftedPotential:
    """``G0(x_i, v) = Phi(u0_i + v) - Phi(u0_i) + v u0_i^(-gamma)``, convex with ``G0(x_i, 0) = 0``."""

    potential: SingularPotential
    u0: np.ndarray = field(repr=False)

    def __post_init__(self):
        u0 = np.array(self.u0, dtype=float)
        if u0.ndim != 1 or not np.all(np.isfinite(u0)) or np.any(u0 <= 0):
            raise ValueError("anchor u0 must be a finite, strictly positive node vector")
        u0.flags.writeable = False
        object.__setattr__(self, "u0", u0)

    @property
    def gamma(self) -> float:
        return self.potential.gamma

    def values(self, v) -> np.ndarray:
        """Nodewise ``G0(x_i, v_i)``; ``+inf`` off the domain.  ``v`` may be a
        node vector or a stack of them (last axis = nodes)."""
        v = np.asarray(v, dtype=float)
        g = self.gamma
        u0 = np.broadcast_to(self.u0, v.shape)   # rows of a 2-D stack share the anchor
        r = v / u0
        out = np.full(v.shape, INF)
        inside = r > -1.0
        if g < 1.0:
            # Phi(0) is finite, so v = -u0 is still in the domain
            edge = r == -1.0
            out[edge] = u0[edge] ** (1 - g) * (-1.0 + 1.0 / (1.0 - g))
        ri = r[inside]
        small = np.abs(ri) < _SERIES_RADIUS
        val = np.empty_like(ri)
        if g == 1.0:
            val[~small] = ri[~small] - np.log1p(ri[~small])
        else:
            rl = ri[~small]
            val[~small] = rl - np.expm1((1.0 - g) * np.log1p(rl)) / (1.0 - g)
        val[small] = _shift_series(ri[small], g)
        out[inside] = u0[inside] ** (1.0 - g) * val
        return out

    def derivatives(self, v) -> np.ndarray:
        """Nodewise ``D_v G0 = u0^(-gamma) - (u0 + v)^(-gamma)``."""
        v = np.asarray(v, dtype=float)
        t = self.u0 + v
        if np.any(t <= 0):
            raise ValueError("dg0 is only defined where u0 + v > 0")
        return self.u0 ** (-self.gamma) - t ** (-self.gamma)

    def prox(self, z, tau, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
        """Vectorised ``argmin_v 1/2 (v - z)^2 + tau_i G0(x_i, v)``.

        Solves ``t - (z + u0) + tau (u0^(-gamma) - t^(-gamma)) = 0`` for
        ``t = u0 + v > 0`` by Newton's method safeguarded with bisection.
        ``tau`` may be a scalar or a node vector.
        """
        z = np.asarray(z, dtype=float)
        tau = np.broadcast_to(np.asarray(tau, dtype=float), z.shape)
        if np.any(tau <= 0):
            raise ValueError("tau must be positive")
        u0, g = self.u0, self.gamma
        shift = z + u0 - tau * u0 ** (-g)

        def psi(t):
            return t - shift - tau * t ** (-g)

        hi = u0 + np.maximum(z, 0.0)
        lo = 0.5 * hi
        for _ in range(80):
            bad = psi(lo) >= 0
            if not bad.any():
                break
            lo = np.where(bad, 0.5 * lo, lo)
        else:
            raise BracketError("prox root not enclosed; anchor or data corrupted")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise BracketError("prox bracket is not finite")

        t = hi.copy()
        for _ in range(max_iter):
            f = psi(t)
            lo = np.where(f < 0, t, lo)
            hi = np.where(f >= 0, t, hi)
            step = f / (1.0 + g * tau * t ** (-g - 1))
            t_new = t - step
            small = np.abs(step) <= np.maximum(tol, 4e-16 * np.abs(t))
            outside = ~small & ~((t_new >= lo) & (t_new <= hi))
            t = np.where(outside, 0.5 * (lo + hi), np.clip(t_new, lo, hi))
            if small.all():
                break
        else:
            raise BracketError("prox iteration failed to converge")
        return t - u0

    # scalar views used by the per-node API
    def g0(self, i: int, v: float) -> float:
        return float(_node_view(self, i).values(np.array([v]))[0])

    def dg0(self, i: int, v: float) -> float:
        return float(_node_view(self, i).derivatives(np.array([v]))[0])

    def prox_g0(self, i: int, z: float, tau: float) -> float:
        return float(_node_view(self, i).prox(np.array([z]), tau)[0])


def _node_view(shift: ShiftedPotential, i: int) -> ShiftedPotential:
    return ShiftedPotential(shift.potential, shift.u0[i:i + 1])


def g0(shift: ShiftedPotential, i: int, v: float) -> float:
    return shift.g0(i, v)


def dg0(shift: ShiftedPotential, i: int, v: float) -> float:
    return shift.dg0(i, v)


def prox_g0(shift: ShiftedPotential, i: int, z: float, tau: float) -> float:
    return shift.prox_g0(i, z, tau)


@dataclass(frozen=True, eq=False)
class EnergyFunctional:
    """Discrete ``J_omega`` in the shifted variable ``v = u - u0``::

        J(v) = 1/2 v^T A v + h sum_i G0(x_i, v_i) - h sum_i omega_i v_i

    The quadratic term stands for ``(c/4) [v]^2`` since ``u^T A u ~ (c/2)[u]^2``.
    """

    op: NonlocalOperator
    shifted: ShiftedPotential
    omega: np.ndarray = field(repr=False)

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        m = self.op.grid.size
        if omega.shape != (m,) or self.shifted.u0.shape != (m,):
            raise ValueError("omega and the anchor must be node vectors on the operator's grid")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega must be finite")
        omega.flags.writeable = False
        object.__setattr__(self, "omega", omega)

    @property
    def h(self) -> float:
        return self.op.grid.h

    @property
    def u0(self) -> np.ndarray:
        return self.shifted.u0

    @property
    def value_at_anchor(self) -> float:
        return self.value(np.zeros_like(self.omega))

    def smooth_value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return 0.5 * float(v @ (self.op.A @ v)) - self.h * float(self.omega @ v)

    def smooth_grad(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self.op.A @ v - self.h * self.omega

    def value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        gv = self.shifted.values(v)
        if not np.all(np.isfinite(gv)):
            return INF
        return self.smooth_value(v) + self.h * float(gv.sum())

    def smooth_values(self, V) -> np.ndarray:
        """Smooth part at each row of the stack ``V``."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return 0.5 * np.einsum("ij,ij->i", V @ self.op.A, V) - self.h * (V @ self.omega)

    def values(self, V) -> np.ndarray:
        """``J`` at each row of the stack ``V`` (``+inf`` rows off the domain)."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        gv = self.shifted.values(V)
        out = np.full(V.shape[0], INF)
        ok = np.all(np.isfinite(gv), axis=1)
        out[ok] = self.smooth_values(V[ok]) + self.h * gv[ok].sum(axis=1)
        return out

    def gradient(self, v) -> np.ndarray:
        """Gradient where every node is strictly inside the barrier."""
        return self.smooth_grad(v) + self.h * self.shifted.derivatives(v)

    def value_u(self, u) -> float:
        """``J_omega`` as a function of ``u`` itself (``J_omega(u0) = 0``)."""
        return self.value(np.asarray(u, dtype=float) - self.u0)


def j_omega(E: EnergyFunctional, v) -> float:
    return E.value(v)
