"""Run configuration for the command-line front end.

Precedence is command-line flags, then a JSON config file, then defaults.
The file mirrors :meth:`RunConfig.to_dict`; unknown keys are rejected.
"""
from __future__ import annotations

import argparse
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .profiles import OmegaSpec
from .solvers import SolveConfig

COMMANDS = ("solve", "torsion", "u0", "verify", "sweep")
CHECKS = ("battery", "barriers", "comparison", "equivalence", "decomposition",
          "boundary_sense", "convergence", "gradient", "anchor", "constant")
FORMATS = ("csv", "json")
METHODS = ("newton", "variational")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    command: str = "solve"
    s: float = 0.5
    gamma: float = 1.0
    a: float = -1.0
    b: float = 1.0
    n: int = 256
    omega: OmegaSpec = field(default_factory=OmegaSpec)
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    method: str = "newton"
    check: Optional[str] = None
    s_values: tuple = (0.25, 0.5, 0.75)
    gamma_values: tuple = (0.5, 1.0, 2.0, 4.0)
    format: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        _require(self.command in COMMANDS, "command", f"must be one of {COMMANDS}")
        for name in ("s", "gamma", "a", "b"):
            v = getattr(self, name)
            _require(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                     name, "must be a finite number")
        _require(0 < self.s < 1, "s", f"must lie in (0, 1), got {self.s}")
        _require(self.gamma > 0, "gamma", f"must be positive, got {self.gamma}")
        _require(self.b > self.a, "b", f"must exceed a ({self.a}), got {self.b}")
        _require(isinstance(self.n, int) and not isinstance(self.n, bool) and self.n >= 4,
                 "n", f"must be an integer >= 4, got {self.n!r}")
        _require(isinstance(self.omega, OmegaSpec), "omega", "must be an omega specification")
        _require(self.tol is None or self.tol > 0, "tol", "must be positive")
        _require(self.max_iter is None or (isinstance(self.max_iter, int) and self.max_iter >= 1),
                 "max_iter", "must be a positive integer")
        _require(self.method in METHODS, "method", f"must be one of {METHODS}")
        if self.command == "verify":
            _require(self.check in CHECKS, "check", f"must be one of {CHECKS}")
        else:
            _require(self.check is None, "check", "is only meaningful for 'verify'")
        _require(len(self.s_values) > 0 and all(0 < v < 1 for v in self.s_values),
                 "s_values", "must be a non-empty list in (0, 1)")
        _require(len(self.gamma_values) > 0 and all(v > 0 for v in self.gamma_values),
                 "gamma_values", "must be a non-empty list of positive numbers")
        _require(self.format is None or self.format in FORMATS, "format",
                 f"must be one of {FORMATS}")
        object.__setattr__(self, "s_values", tuple(float(v) for v in self.s_values))
        object.__setattr__(self, "gamma_values", tuple(float(v) for v in self.gamma_values))

    @property
    def output_format(self) -> str:
        if self.format is not None:
            return self.format
        return "csv" if self.command in ("solve", "torsion", "u0") else "json"

    def solver_config(self) -> SolveConfig:
        kw = {}
        if self.tol is not None:
            kw["tol_residual"] = self.tol
        if self.max_iter is not None:
            kw["max_iter"] = self.max_iter
        return SolveConfig(**kw)

    def to_dict(self) -> dict:
        return {
            "command": self.command, "check": self.check,
            "s": self.s, "gamma": self.gamma, "a": self.a, "b": self.b, "n": self.n,
            "omega": self.omega.to_dict(),
            "solver": {"tol": self.tol, "max_iter": self.max_iter, "method": self.method},
            "sweep": {"s_values": list(self.s_values), "gamma_values": list(self.gamma_values)},
            "output": {"format": self.format, "path": self.out},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**_flatten(d))


def _require(cond, name, msg):
    if not cond:
        raise ConfigError(f"{name}: {msg}")


_SECTIONS = {
    "solver": {"tol": "tol", "max_iter": "max_iter", "method": "method"},
    "sweep": {"s_values": "s_values", "gamma_values": "gamma_values"},
    "output": {"format": "format", "path": "out"},
}
_TOP = ("command", "check", "s", "gamma", "a", "b", "n", "omega")


def _flatten(d: dict) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be a JSON object")
    out = {}
    for key, val in d.items():
        if key in _SECTIONS:
            if not isinstance(val, dict):
                raise ConfigError(f"{key}: must be an object")
            for sub, v in val.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                out[_SECTIONS[key][sub]] = v
        elif key in _TOP:
            out[key] = val
        else:
            raise ConfigError(f"{key}: unknown key")
    if "omega" in out:
        om = out["omega"]
        try:
            out["omega"] = (OmegaSpec.parse(om) if isinstance(om, str)
                            else OmegaSpec.from_dict(om))
        except (ValueError, TypeError, AttributeError) as exc:
            raise ConfigError(f"omega: {exc}") from exc
    for key in ("s_values", "gamma_values"):
        if key in out:
            out[key] = tuple(out[key])
    return out


def _number_list(text: str):
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fraclap",
        description="Solve and verify (-Delta)^s u = u^(-gamma) + omega on an interval.")
    p.add_argument("command", nargs="?", choices=COMMANDS,
                   help="pipeline to run (may come from --config)")
    p.add_argument("check", nargs="?", choices=CHECKS,
                   help="for 'verify': a single check or 'battery'")
    p.add_argument("--config", help="JSON config file (flags override its values)")
    p.add_argument("--s", help="fractional order in (0, 1); comma list for 'sweep'")
    p.add_argument("--gamma", help="singularity exponent > 0; comma list for 'sweep'")
    p.add_argument("--a", type=float, help="left endpoint")
    p.add_argument("--b", type=float, help="right endpoint")
    p.add_argument("--n", type=int, help="number of cells")
    p.add_argument("--omega", help="data term: zero | constant:C | sin[:k=v,..] | "
                                   "bump[:k=v,..] | expr:EXPR | file:PATH")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration budget")
    p.add_argument("--method", choices=METHODS, help="route for 'solve'")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=FORMATS, help="output format")
    return p


def load_config_file(path) -> dict:
    """Read a JSON config file; ``FileNotFoundError`` propagates."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON ({exc})") from exc
    return _flatten(data)


def config_from_namespace(ns: argparse.Namespace) -> RunConfig:
    """Merge parsed flags over an optional config file over the defaults."""
    merged = load_config_file(ns.config) if ns.config else {}
    if ns.command is not None:
        merged["command"] = ns.command
    if ns.check is not None:
        merged["check"] = ns.check
    if "command" not in merged:
        raise ConfigError("command: missing (give it on the command line or in --config)")
    sweep = merged["command"] == "sweep"
    for name, plural in (("s", "s_values"), ("gamma", "gamma_values")):
        text = getattr(ns, name)
        if text is None:
            continue
        try:
            vals = _number_list(text)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {text!r}") from None
        if sweep:
            merged[plural] = tuple(vals)
        elif len(vals) != 1:
            raise ConfigError(f"{name}: a single value is required for '{merged['command']}'")
        else:
            merged[name] = vals[0]
    for name in ("a", "b", "n", "tol", "max_iter", "method", "format", "out"):
        val = getattr(ns, name)
        if val is not None:
            merged[name] = val
    if ns.omega is not None:
        try:
            merged["omega"] = OmegaSpec.parse(ns.omega)
        except ValueError as exc:
            raise ConfigError(f"omega: {exc}") from exc
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from exc


def parse_config(argv=None) -> RunConfig:
    """Parse ``argv``; raises :class:`ConfigError` or ``FileNotFoundError``.

    ``argparse`` itself exits with status 2 on malformed flags.
    """
    return config_from_namespace(build_parser().parse_args(argv))
