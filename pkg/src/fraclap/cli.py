"""Command-line front end.

Exit codes: 0 success, 1 solver non-convergence, 2 usage error, 3 file not
found, 4 failed verification.  Data go to ``--out`` or standard output;
diagnostics go to standard error.
"""
from __future__ import annotations

import logging
import os
import sys

from . import verification as V
from .config import ConfigError, RunConfig, parse_config
from .energy import EnergyFunctional, ShiftedPotential, SingularPotential
from .exceptions import ConvergenceError
from .grid import build_grid
from .io import write_json, write_profile_csv
from .operator import assemble
from .solvers import (SemilinearTerm, minimize_j_omega, solve_semilinear, solve_torsion,
                      solve_u0, solve_weak_newton)

log = logging.getLogger("fraclap")

EXIT_OK, EXIT_NONCONVERGED, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4


def _threads() -> int:
    raw = os.environ.get("FRACLAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"FRACLAP_THREADS: expected an integer, got {raw!r}") from None


def _emit_solution(cfg: RunConfig, grid, report, u0_report, torsion):
    if cfg.output_format == "json":
        write_json(report.to_dict(), cfg.out)
        return
    lower, upper = u0_report.extras["lower_barrier"], u0_report.extras["upper_barrier"]
    write_profile_csv(cfg.out, grid, report.solution, u0_report.solution, lower, upper)


def _run_solve(cfg: RunConfig) -> int:
    scfg = cfg.solver_config()
    grid = build_grid(cfg.a, cfg.b, cfg.n)
    op = assemble(grid, cfg.s)
    sp = SingularPotential(cfg.gamma)
    if op.outside_hypotheses:
        log.warning("s=%g >= dim/2: outside the N > 2s hypothesis; results are heuristic", cfg.s)
    torsion = solve_torsion(op, scfg)
    u0 = solve_u0(op, sp, scfg, torsion=torsion)
    if cfg.command == "torsion":
        report = torsion
    elif cfg.command == "u0":
        report = u0
    else:
        omega = cfg.omega.sample(grid)
        if cfg.method == "newton":
            report = solve_weak_newton(op, sp, omega, scfg, torsion=torsion)
        else:
            E = EnergyFunctional(op, ShiftedPotential(sp, u0.solution), omega)
            report = minimize_j_omega(E, scfg)
    log.info("%s: %d iterations, residual %.3e", report.path, report.iterations,
             report.final_residual)
    _emit_solution(cfg, grid, report, u0, torsion)
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def _single_check(cfg: RunConfig) -> V.CheckReport:
    scfg = cfg.solver_config()
    if cfg.check == "constant":
        return V.check_constant()
    if cfg.check == "convergence":
        return V.convergence_study(cfg.s, cfg.gamma, a=cfg.a, b=cfg.b, cfg=scfg)
    if cfg.check == "boundary_sense":
        fam = V.solve_family(cfg.s, cfg.gamma, omega=cfg.omega, a=cfg.a, b=cfg.b, cfg=scfg)
        return V.check_boundary_sense(fam, (0.1,))
    grid = build_grid(cfg.a, cfg.b, cfg.n)
    op = assemble(grid, cfg.s)
    sp = SingularPotential(cfg.gamma)
    omega = cfg.omega.sample(grid)
    torsion = solve_torsion(op, scfg)
    if cfg.check == "barriers":
        u0 = solve_u0(op, sp, scfg, torsion=torsion, project=False)
        return V.check_barriers(u0, torsion, cfg.gamma)
    if cfg.check == "comparison":
        # omega against omega + 1
        return V.check_comparison(op, sp, omega, omega + 1.0, scfg, torsion=torsion)
    u0 = solve_u0(op, sp, scfg, torsion=torsion)
    if cfg.check == "equivalence":
        return V.check_equivalence(op, sp, omega, scfg, u0_report=u0, torsion=torsion,
                                   label=str(cfg.omega))
    if cfg.check == "gradient":
        return V.check_gradient(op, sp, omega, u0, cfg=scfg)
    if cfg.check == "anchor":
        return V.check_anchor(op, sp, scfg, u0_report=u0)
    # decomposition
    term = SemilinearTerm.truncated_linear(0.1, 10.0)
    sl = solve_semilinear(op, sp, term, scfg, u0_report=u0)
    return V.check_decomposition(sl, u0, sp, term, scfg, op=op)


def _run_verify(cfg: RunConfig) -> int:
    scfg = cfg.solver_config()
    progress = lambda msg: print(msg, file=sys.stderr, flush=True)
    if cfg.command == "sweep" or cfg.check == "battery":
        if cfg.command == "sweep":
            bc = V.BatteryConfig(s_values=cfg.s_values, gamma_values=cfg.gamma_values,
                                 a=cfg.a, b=cfg.b, n=cfg.n)
        else:
            bc = V.BatteryConfig(a=cfg.a, b=cfg.b, n=cfg.n)
        result = V.run_battery(bc, scfg, progress=progress, workers=_threads())
        print(V.summary_table(result), file=sys.stderr)
        write_json(result, cfg.out)
        return EXIT_OK if not result["summary"]["failed"] else EXIT_CHECK_FAILED
    rep = _single_check(cfg)
    print(f"{rep.name}: {'passed' if rep.passed else 'FAILED'} "
          f"(worst slack {rep.worst_slack:.4e}, tolerance {rep.tolerance:.2e}) {rep.notes}",
          file=sys.stderr)
    write_json(rep.to_dict(), cfg.out)
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the process exit code."""
    try:
        if cfg.command in ("solve", "torsion", "u0"):
            return _run_solve(cfg)
        return _run_verify(cfg)
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGED
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename or exc)
        return EXIT_NOT_FOUND
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:         # argparse usage errors
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename or exc)
        return EXIT_NOT_FOUND
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
