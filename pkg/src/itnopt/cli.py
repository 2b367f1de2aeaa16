"""Command-line front end.

Subcommands:
  simulate       forward integration only, control switched off
  solve          forward-backward sweep for the optimal control
  sweep          one solve per net-usage level plus overlay figures
  compare-costs  solve under both cost functionals and overlay the results
  verify         gradient check plus dual-solver cross-validation

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence or
failed verification, 4 IO failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .config import ScenarioConfig, load_config
from .errors import (
    InvariantViolation,
    ItnOptError,
    MissingArtifact,
    ParseError,
    UnknownKey,
)
from .integrators import TimeGrid
from .model import AdjointMode, ControlGrid
from .scenarios import TABLE_B_VALUES, compare_costs, run_scenario, run_sweep
from .sweep import SweepConfig, fbs_solve
from .verification import (
    CrossValidationReport,
    direct_solve_projected_gradient,
    finite_difference_gradient_check,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="scenario file (key = value lines)")
    sub.add_argument("--set", dest="sets", action="append", default=[],
                     metavar="KEY=VALUE", help="override one config key (repeatable)")
    sub.add_argument("--out", metavar="DIR", help="output directory")
    sub.add_argument("--b", type=float, help="net-usage proportion in [0,1]")
    sub.add_argument("--tf", type=float, help="horizon length in days")
    sub.add_argument("--grid", type=int, help="number of grid intervals")
    sub.add_argument("--cost", choices=["j1", "j2"], help="cost functional")
    sub.add_argument("--adjoint", choices=["decoupled", "exact"],
                     help="costate system variant")


def _resolve(args: argparse.Namespace) -> ScenarioConfig:
    overrides: dict[str, str] = {}
    for item in args.sets:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    # dedicated flags outrank --set
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.b is not None:
        overrides["b"] = repr(args.b)
    if args.tf is not None:
        overrides["tf"] = repr(args.tf)
    if args.grid is not None:
        overrides["n"] = str(args.grid)
    if args.cost is not None:
        overrides["cost"] = args.cost
    if args.adjoint is not None:
        overrides["adjoint_mode"] = args.adjoint
    return load_config(args.config, overrides)


def _report_run(manifest) -> None:
    print(f"cost={manifest.cost_value!r} iterations={manifest.iterations} "
          f"converged={manifest.converged} "
          f"duration={manifest.duration_seconds:.2f}s")
    print("artifacts: " + ", ".join(manifest.artifacts))


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = replace(_resolve(args), control_enabled=False)
    _report_run(run_scenario(cfg))
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    cfg = replace(_resolve(args), control_enabled=True)
    manifest = run_scenario(cfg)
    _report_run(manifest)
    if not manifest.converged:
        print("solver did not converge within the iteration budget", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if cfg.sweep_b is None:
        cfg = replace(cfg, sweep_b=TABLE_B_VALUES)
    requested = len(cfg.sweep_b)
    manifests = run_sweep(cfg)
    for m in manifests:
        print(f"b={m.resolved_config['b']} cost={m.cost_value!r} "
              f"iterations={m.iterations} converged={m.converged}")
    failed = requested - len(manifests)
    if failed:
        print(f"{failed} of {requested} sweep members failed", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if not all(m.converged for m in manifests):
        print("some sweep members did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_compare_costs(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    m1, m2 = compare_costs(cfg)
    for tag, m in (("host-only", m1), ("host+vector", m2)):
        print(f"{tag}: cost={m.cost_value!r} iterations={m.iterations} "
              f"converged={m.converged}")
    if not (m1.converged and m2.converged):
        print("a comparison solve did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    # Always runs the exact costate mode: the decoupled variant is not the
    # derivative of the cost, so checking it would fail by construction.
    cfg = _resolve(args)
    grad_n = args.grid if args.grid is not None else 2000
    oracle_n = args.grid if args.grid is not None else 500
    failures: list[str] = []

    grad_grid = TimeGrid(cfg.t0, cfg.tf, grad_n)
    probe = ControlGrid.constant(0.5, cfg.t0, cfg.tf, grad_n)
    report = finite_difference_gradient_check(
        cfg.params, cfg.x0, probe, grad_grid, cfg.cost,
        n_directions=20, epsilon=1e-5, seed=cfg.seed)
    frac_tight = float(np.mean(report.per_direction_errors <= 1e-3))
    print(f"gradient check (n={grad_n}, {report.directions_tested} directions, "
          f"seed={cfg.seed}): max_rel_error={report.max_rel_error:.3e}, "
          f"share<=1e-3: {frac_tight:.0%}")
    if report.max_rel_error > 1e-2:
        failures.append("gradient max relative error above 1e-2")
    if frac_tight < 0.95:
        failures.append("fewer than 95% of directions within 1e-3")

    oracle_grid = TimeGrid(cfg.t0, cfg.tf, oracle_n)
    fbs = fbs_solve(cfg.params, cfg.x0, oracle_grid,
                    SweepConfig(adjoint_mode=AdjointMode.EXACT, cost=cfg.cost))
    direct = direct_solve_projected_gradient(
        cfg.params, cfg.x0, oracle_grid, which=cfg.cost)
    w = np.full(oracle_n + 1, oracle_grid.h)
    w[0] = w[-1] = 0.5 * oracle_grid.h
    d = fbs.control.values - direct.control.values
    cv = CrossValidationReport(
        j_fbs=fbs.cost_value,
        j_direct=direct.cost_value,
        rel_gap=abs(fbs.cost_value - direct.cost_value) / max(abs(fbs.cost_value), 1.0),
        control_l2_distance=float(np.sqrt(np.dot(w, d * d))),
    )
    print(f"cross-validation (n={oracle_n}, b={cfg.params.b:g}, {cfg.cost.value}): "
          f"j_fbs={cv.j_fbs!r} j_direct={cv.j_direct!r} "
          f"rel_gap={cv.rel_gap:.3e} control_l2={cv.control_l2_distance:.4f}")
    print(f"sweep solver: {fbs.iterations} iterations, converged={fbs.converged}; "
          f"direct solver: {direct.iterations} iterations, converged={direct.converged}")
    if not fbs.converged:
        failures.append("sweep solver did not converge")
    if not direct.converged:
        failures.append("direct solver did not converge")
    if cv.rel_gap > 1e-2:
        failures.append("solver cost gap above 1e-2")

    if failures:
        for f in failures:
            print(f"verify: FAIL: {f}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print("verify: PASS")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itnopt",
        description="Optimal control of a host-vector malaria model "
                    "under insecticide-treated-net usage.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, handler, blurb in (
            ("simulate", _cmd_simulate, "integrate the uncontrolled system"),
            ("solve", _cmd_solve, "compute the optimal control by forward-backward sweep"),
            ("sweep", _cmd_sweep, "solve across a list of net-usage levels"),
            ("compare-costs", _cmd_compare_costs, "solve under both cost functionals"),
            ("verify", _cmd_verify, "gradient check and dual-solver cross-validation")):
        sub = subs.add_parser(name, help=blurb)
        _add_common_flags(sub)
        sub.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, UnknownKey, InvariantViolation) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (MissingArtifact, OSError) as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO
    except ItnOptError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
