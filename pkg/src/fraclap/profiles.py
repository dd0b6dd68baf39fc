"""Data terms ``omega`` as grid functions.

An :class:`OmegaSpec` is a tagged description (``zero``, ``constant``, the
named profiles ``sin`` and ``bump``, a numpy ``expression`` in ``x``, or a
two-column CSV ``file``) that is turned into a node vector by
:meth:`OmegaSpec.sample`.
"""
from __future__ import annotations

import ast
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

KINDS = ("zero", "constant", "sin", "bump", "expression", "file")

_DEFAULTS = {
    "zero": {},
    "constant": {"value": 1.0},
    # sign-changing full period on (a, b)
    "sin": {"amp": 1.0, "freq": 1.0},
    # smooth compactly supported bump, off-centre to break the symmetry
    "bump": {"amp": 1.0, "center": 0.3, "width": 0.2},
    "expression": {"expr": "0*x"},
    "file": {"path": ""},
}

_EXPR_FUNCS = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sinh", "cosh",
    "arctan", "minimum", "maximum", "where", "sign", "heaviside")}
_EXPR_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
               ast.Constant, ast.Compare, ast.operator, ast.unaryop, ast.cmpop, ast.keyword)


def _compile_expression(expr: str):
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise ValueError(f"disallowed syntax in omega expression: {type(node).__name__}")
        if isinstance(node, ast.Call) and not (
                isinstance(node.func, ast.Name) and node.func.id in _EXPR_FUNCS):
            raise ValueError("only numpy math functions may be called in omega expressions")
    return compile(tree, "<omega>", "eval")


def bump(x, center, width, amp=1.0):
    """``amp * exp(1 - 1/(1 - r^2))`` for ``|r| < 1``, ``r = (x - center)/width``."""
    r = (np.asarray(x, dtype=float) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def read_profile_csv(path, grid: Grid) -> np.ndarray:
    """Read ``x, value`` rows that sit exactly on the interior nodes of ``grid``."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise
                continue  # header line
    data = np.array(rows, dtype=float).reshape(-1, 2)
    if data.shape[0] != grid.size or not np.allclose(data[:, 0], grid.nodes, rtol=0,
                                                    atol=1e-9 * (grid.b - grid.a)):
        raise ValueError(f"{path}: x column must list the {grid.size} interior nodes of the grid "
                         "(no interpolation is performed)")
    return data[:, 1].copy()


@dataclass(frozen=True)
class OmegaSpec:
    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown omega kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for omega kind {self.kind!r}")
        merged = {**_DEFAULTS[self.kind], **self.params}
        if self.kind == "expression":
            _compile_expression(str(merged["expr"]))
        object.__setattr__(self, "params", merged)

    def sample(self, grid: Grid) -> np.ndarray:
        x = np.array(grid.nodes)
        p = self.params
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, float(p["value"]))
        length = grid.b - grid.a
        if self.kind == "sin":
            return float(p["amp"]) * np.sin(2 * math.pi * float(p["freq"]) * (x - grid.a) / length)
        if self.kind == "bump":
            return bump(x, grid.a + float(p["center"]) * length, float(p["width"]) * length,
                        float(p["amp"]))
        if self.kind == "expression":
            code = _compile_expression(str(p["expr"]))
            env = {"x": x, "pi": math.pi, "e": math.e, "a": grid.a, "b": grid.b, **_EXPR_FUNCS}
            val = np.asarray(eval(code, {"__builtins__": {}}, env), dtype=float)
            return np.broadcast_to(val, x.shape).copy()
        return read_profile_csv(p["path"], grid)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "OmegaSpec":
        d = dict(d)
        kind = d.pop("kind", "zero")
        if kind == "profile":
            kind = d.pop("name")
        return cls(kind, d)

    @classmethod
    def parse(cls, text: str) -> "OmegaSpec":
        """Parse the command-line form, e.g. ``constant:1``, ``bump:amp=2,width=0.1``,
        ``expr:sin(pi*x)``, ``file:data.csv``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind == "expr":
            kind = "expression"
        if kind not in KINDS:
            raise ValueError(f"unknown omega kind {kind!r}")
        if not rest:
            return cls(kind)
        if kind == "constant":
            return cls(kind, {"value": float(rest)})
        if kind == "expression":
            return cls(kind, {"expr": rest})
        if kind == "file":
            return cls(kind, {"path": rest})
        params = {}
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"expected key=value in omega parameters, got {item!r}")
            params[key.strip()] = float(val)
        return cls(kind, params)

    def __str__(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "constant":
            return f"constant:{self.params['value']:g}"
        if self.kind == "expression":
            return f"expr:{self.params['expr']}"
        if self.kind == "file":
            return f"file:{self.params['path']}"
        return self.kind + ":" + ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))


# data battery used by the checks
ZERO = OmegaSpec("zero")
ONE = OmegaSpec("constant", {"value": 1.0})
SIN = OmegaSpec("sin")
BUMP = OmegaSpec("bump")
NEG_BUMP = OmegaSpec("bump", {"amp": -0.5})
