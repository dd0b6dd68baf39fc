"""Uniform vertex mesh of an interval (a, b).

Only the interior vertices ``x_i = a + i*h`` (``i = 1..n-1``) carry unknowns.
Grid functions are understood to vanish identically on the complement of
(a, b); the endpoints are not degrees of freedom.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``(a, b)`` with ``n`` cells and ``n - 1`` interior nodes.

    Node vectors living on this grid are extended by zero outside ``(a, b)``.
    """

    a: float
    b: float
    n: int

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def size(self) -> int:
        return self.n - 1

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.a + self.h * np.arange(1, self.n, dtype=float)
        x.flags.writeable = False
        return x

    @cached_property
    def boundary_dist(self) -> np.ndarray:
        x = self.nodes
        d = np.minimum(x - self.a, self.b - x)
        d.flags.writeable = False
        return d

    def refine(self) -> "Grid":
        """The nested grid with ``2n`` cells; old node ``i`` becomes new node ``2i``."""
        return Grid(self.a, self.b, 2 * self.n)

    def coarse_index(self, fine: "Grid") -> np.ndarray:
        """Indices into ``fine.nodes`` of this grid's nodes (requires nesting)."""
        if fine.a != self.a or fine.b != self.b or fine.n % self.n:
            raise ValueError("grids are not nested")
        r = fine.n // self.n
        return r * np.arange(1, self.n) - 1

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n": self.n, "h": self.h,
                "nodes": self.nodes.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return build_grid(d["a"], d["b"], d["n"])


def build_grid(a: float, b: float, n: int) -> Grid:
    """Build the uniform grid of ``(a, b)`` with ``n`` cells.

    Raises ``ValueError`` for ``b <= a`` or ``n < 4``.
    """
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if int(n) != n or n < 4:
        raise ValueError(f"need an integer n >= 4, got n={n}")
    return Grid(a, b, int(n))
