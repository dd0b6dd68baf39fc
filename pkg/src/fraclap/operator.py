"""Discrete fractional Laplacian on a uniform interval grid.

The scheme splits the singular integral at node ``x_i`` as

    c * int_0^inf (2u(x_i) - u(x_i + y) - u(x_i - y)) y^(-1-2s) dy

into a near field ``0 < y < h``, where the symmetric difference is replaced by
the centred second difference (exact for quadratics), and a far field
``y > h``, where ``u`` is replaced by its continuous piecewise-linear
interpolant (hat functions), extended by zero outside ``(a, b)``.  The far
field is integrated exactly, so the weights are closed-form and depend only
on the lattice distance ``k = |i - j|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.linalg import toeplitz

from .exceptions import QuadratureError
from .grid import Grid

# Above this lattice distance the two-sided closed form loses ~k^2 digits to
# cancellation; the Taylor expansion about t = k is used instead.
SERIES_THRESHOLD = 16
_SERIES_TERMS = 9


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional order ``s`` in (0, 1) on ``R^dim``."""

    s: float
    dim: int = 1

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise ValueError(f"fractional order s must lie in (0, 1), got {self.s}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def sobolev_embedding_valid(self) -> bool:
        """Whether ``dim > 2s``, the standing hypothesis behind ``2*_s``."""
        return self.dim > 2 * self.s

    @property
    def critical_exponent(self) -> float:
        """The fractional Sobolev exponent ``2N / (N - 2s)``."""
        if not self.sobolev_embedding_valid:
            raise ValueError(
                f"2*_s undefined: dim={self.dim} <= 2s={2 * self.s} "
                "(outside the N > 2s hypothesis)")
        return 2 * self.dim / (self.dim - 2 * self.s)


def _as_order(order, dim=1) -> FractionalOrder:
    if isinstance(order, FractionalOrder):
        return order
    return FractionalOrder(float(order), dim)


def normalizing_constant(order) -> float:
    """``c_{N,s} = 4^s Gamma(N/2 + s) / (-pi^(N/2) Gamma(-s))``.

    ``order`` is a :class:`FractionalOrder` or a bare ``s`` (then ``N = 1``).
    """
    order = _as_order(order)
    s, N = order.s, order.dim
    return 4.0**s * special.gamma(N / 2 + s) / (-math.pi ** (N / 2) * special.gamma(-s))


def normalizing_constant_quad(order) -> float:
    """Evaluate ``c_{N,s}`` from its integral definition by adaptive quadrature.

    Integrating out the ``N - 1`` transverse directions (``xi' = |xi_1| eta``)
    factors the integral into a radial integral over ``eta`` and the
    one-dimensional oscillatory integral ``int (1 - cos t) |t|^(-1-2s) dt``.
    Both factors are computed numerically.
    """
    order = _as_order(order)
    s, N = order.s, order.dim
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=500)

    # int_0^1 2 sin^2(t/2) t^(-1-2s) dt, written without cancellation
    near, _ = integrate.quad(lambda t: 2.0 * np.sin(t / 2) ** 2 * t ** (-1 - 2 * s),
                             0.0, 1.0, **opts)
    osc, _ = integrate.quad(lambda t: t ** (-1 - 2 * s), 1.0, np.inf,
                            weight="cos", wvar=1.0, limit=500)
    axial = 2.0 * (near + 1.0 / (2 * s) - osc)

    if N == 1:
        transverse = 1.0
    else:
        p = (N + 2 * s) / 2
        sphere = 2 * math.pi ** ((N - 1) / 2) / special.gamma((N - 1) / 2)
        radial, _ = integrate.quad(lambda r: (1 + r * r) ** (-p) * r ** (N - 2),
                                   0.0, np.inf, **opts)
        transverse = sphere * radial
    return 1.0 / (axial * transverse)


def _prim0(t, s):
    # antiderivative of t^(-1-2s)
    return -t ** (-2 * s) / (2 * s)


def _prim1(t, s):
    # antiderivative of t^(-2s)
    if s == 0.5:
        return np.log(t)
    return t ** (1 - 2 * s) / (1 - 2 * s)


def _far_weights_closed(k, s):
    k = np.asarray(k, dtype=float)
    right = (k + 1) * (_prim0(k + 1, s) - _prim0(k, s)) - (_prim1(k + 1, s) - _prim1(k, s))
    lo = np.maximum(k - 1, 1.0)
    left = (_prim1(k, s) - _prim1(lo, s)) - (k - 1) * (_prim0(k, s) - _prim0(lo, s))
    return left + right


def _far_weights_series(k, s):
    # int_{-1}^{1} (1 - |tau|) f(k + tau) d tau with f(t) = t^(-p), expanded in
    # even Taylor terms; the triangle's moments are 2 / ((2m+1)(2m+2)).
    k = np.asarray(k, dtype=float)
    p = 1 + 2 * s
    out = np.zeros_like(k)
    coef = 1.0  # p (p+1) ... (p+2m-1) / (2m)!
    for m in range(_SERIES_TERMS):
        if m:
            coef *= (p + 2 * m - 2) * (p + 2 * m - 1) / ((2 * m - 1) * (2 * m))
        out += coef * 2.0 / ((2 * m + 1) * (2 * m + 2)) * k ** (-p - 2 * m)
    return out


def far_weights(s: float, m: int) -> np.ndarray:
    """Dimensionless far-field weights ``w_k``, ``k = 1..m``.

    ``w_k = int_{max(1, k-1)}^{k+1} (1 - |t - k|) t^(-1-2s) dt``; the physical
    weight is ``c * h^(-2s) * w_k``.
    """
    k = np.arange(1, m + 1, dtype=float)
    w = np.empty(m)
    small = k < SERIES_THRESHOLD
    w[small] = _far_weights_closed(k[small], s)
    w[~small] = _far_weights_series(k[~small], s)
    return w


def far_weight_quad(k: int, s: float, rtol: float = 1e-10) -> float:
    """Adaptive-quadrature value of ``w_k``; raises ``QuadratureError`` on failure."""
    f = lambda t: (1.0 - abs(t - k)) * t ** (-1 - 2 * s)
    pieces = [(max(1.0, k - 1.0), float(k)), (float(k), k + 1.0)]
    total, err = 0.0, 0.0
    for lo, hi in pieces:
        if hi <= lo:
            continue
        v, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += v
        err += e
    if not err <= rtol * abs(total):
        raise QuadratureError(f"w_{k} (s={s}): estimated error {err:.3g} exceeds "
                              f"relative tolerance {rtol:g}")
    return total


@dataclass(frozen=True, eq=False)
class NonlocalOperator:
    """Assembled discrete ``(-Delta)^s`` with exterior-zero condition.

    ``L`` acts pointwise, ``(L u)_i ~ (-Delta)^s u(x_i)``; ``A = h L`` is the
    energy matrix with ``u^T A u ~ (c/2) [u]^2``.  ``tail`` is the closed-form
    contribution of the exterior half-lines and ``boundary_cell`` the extra
    mass of the two boundary cells ``(a, x_1)`` and ``(x_{n-1}, b)`` on which
    the interpolant ramps down to zero (plus, at the two end nodes, the
    near-field coupling to the zero endpoint value); together they are the
    excess of each row of ``L`` over its off-diagonal sum.
    """

    grid: Grid
    order: FractionalOrder
    c: float
    L: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)
    boundary_cell: np.ndarray = field(repr=False)

    @property
    def s(self) -> float:
        return self.order.s

    @property
    def outside_hypotheses(self) -> bool:
        return not self.order.sobolev_embedding_valid

    def apply(self, u) -> np.ndarray:
        return self.L @ np.asarray(u, dtype=float)

    def energy(self, u, v=None) -> float:
        u = np.asarray(u, dtype=float)
        v = u if v is None else np.asarray(v, dtype=float)
        return float(u @ (self.A @ v))


def assemble(grid: Grid, order, method: str = "closed") -> NonlocalOperator:
    """Assemble the dense operator for ``grid`` and fractional ``order``.

    ``method="quad"`` recomputes every far-field weight by adaptive quadrature
    (slow; for validation).
    """
    order = _as_order(order)
    s = order.s
    c = normalizing_constant(order)
    h, n, m = grid.h, grid.n, grid.size
    scale = c * h ** (-2 * s)

    if method == "closed":
        w = far_weights(s, max(m - 1, 1))
    elif method == "quad":
        w = np.array([far_weight_quad(k, s) for k in range(1, max(m - 1, 1) + 1)])
    else:
        raise ValueError(f"unknown weight method {method!r}")
    near = 1.0 / (2 - 2 * s)

    col = np.zeros(m)
    col[1:] = -scale * w[: m - 1]
    col[1] -= scale * near
    L = toeplitz(col)
    # Far-field mass is c*h^(-2s) * 2/(2s) on every row: the hats, including
    # those centred on exterior lattice nodes, form a partition of unity.
    np.fill_diagonal(L, scale * (2 * near + 1.0 / s))

    # exterior lattice mass: sum_{k >= K} w_k = 1/(2s) - sum_{k < K} w_k
    cum = np.concatenate(([0.0], np.cumsum(far_weights(s, n))))
    i = np.arange(1, n)
    exterior = scale * ((1 / (2 * s) - cum[i - 1]) + (1 / (2 * s) - cum[n - i - 1]))
    x = grid.nodes
    tail = c / (2 * s) * ((x - grid.a) ** (-2 * s) + (grid.b - x) ** (-2 * s))
    cell = np.maximum(exterior - tail, 0.0)
    # nodes next to an endpoint also lose the near-field coupling to it
    cell[0] += scale * near
    cell[-1] += scale * near

    L.flags.writeable = False
    A = h * L
    A.flags.writeable = False
    for arr in (tail, cell):
        arr.flags.writeable = False
    return NonlocalOperator(grid, order, c, L, A, tail, cell)


def gagliardo_seminorm(op: NonlocalOperator, u) -> float:
    """Discrete ``[u]_{D^{s,2}} = sqrt((2/c) u^T A u)`` of the zero extension of ``u``."""
    q = op.energy(u)
    return math.sqrt(max(2.0 / op.c * q, 0.0))


def weak_residual(op: NonlocalOperator, u, rhs) -> float:
    """``max_i |(L u)_i - rhs_i|`` over the interior nodes."""
    r = op.apply(u) - np.asarray(rhs, dtype=float)
    return float(np.max(np.abs(r))) if r.size else 0.0


def fractional_laplacian_quad(f, x: float, s: float, support, breakpoints=(),
                              rtol: float = 1e-11) -> float:
    """Direct adaptive quadrature of ``(-Delta)^s f(x)`` in one dimension.

    ``f`` must vanish outside ``support = (lo, hi)`` and be smooth between the
    given ``breakpoints`` and on a neighbourhood of ``x``.  The principal value
    is taken in symmetric form ``int_0^inf (2f(x) - f(x+y) - f(x-y)) y^(-1-2s)``.
    """
    c = normalizing_constant(s)
    lo, hi = support
    fx = f(x)
    reach = max(hi - x, x - lo)
    cuts = sorted({abs(p - x) for p in (lo, hi, *breakpoints) if 0 < abs(p - x) < reach})
    g = lambda y: (2 * fx - f(x + y) - f(x - y)) * y ** (-1 - 2 * s)
    total = 0.0
    edges = [0.0, *cuts, reach]
    for y0, y1 in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(g, y0, y1, epsabs=0.0, epsrel=rtol, limit=400)
        total += v
    # beyond ``reach`` both f(x +- y) vanish
    total += 2 * fx * reach ** (-2 * s) / (2 * s)
    return c * total
