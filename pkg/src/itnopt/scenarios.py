"""Scenario execution and persistence: CSVs, manifests, figures.

A run takes a resolved ScenarioConfig, performs either a plain forward
integration (control disabled) or a full sweep solve, and persists the
trajectory CSV, the control CSV, SVG figures, and a JSON manifest that
materializes every setting needed to reproduce the run bit-for-bit.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, as_flat_dict, load_config
from .errors import InvariantViolation
from .integrators import Trajectory, integrate_cost, rk4_forward
from .model import ControlGrid, CostKind, state_rhs_fn
from .plots import CSV_COLUMNS, PlotSpec, read_trajectory_csv, render_plots
from .sweep import SweepConfig, fbs_solve

logger = logging.getLogger(__name__)

TABLE_B_VALUES = (0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75)


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to audit and reproduce one run.

    resolved_config holds every setting in config-file token form;
    artifacts lists the files written, relative to the output directory.
    """

    resolved_config: dict[str, str]
    cost_value: float
    iterations: int
    converged: bool
    residuals: tuple[float, ...]
    duration_seconds: float
    artifacts: tuple[str, ...]
    tool_version: str


def _tool_version() -> str:
    from . import __version__
    return f"itnopt {__version__}"


def scenario_name(cfg: ScenarioConfig) -> str:
    b = f"{cfg.params.b:g}"
    if cfg.control_enabled:
        return f"solve_b{b}_{cfg.cost.value}_{cfg.adjoint_mode.value}"
    return f"simulate_b{b}_{cfg.cost.value}"


def write_csv(trajectory: Trajectory, control: ControlGrid,
              adjoints: Trajectory | None, path: str | Path) -> Path:
    """Write the ten-column trajectory CSV; adjoints of None become zeros."""
    grid = trajectory.grid
    if (control.t0, control.tf, control.n) != (grid.t0, grid.tf, grid.n):
        raise InvariantViolation("control and trajectory are on different grids")
    if adjoints is not None and adjoints.grid != grid:
        raise InvariantViolation("adjoints and trajectory are on different grids")
    l_samples = np.zeros((grid.n + 1, 4)) if adjoints is None else adjoints.samples
    times = grid.times
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for j in range(grid.n + 1):
            row = (times[j], *trajectory.samples[j], control.values[j], *l_samples[j])
            # repr keeps full round-trip precision for plain Python floats
            writer.writerow([repr(float(v)) for v in row])
    return path


def _write_control_csv(control: ControlGrid, path: Path) -> Path:
    times = control.times
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "u"))
        for t, u in zip(times, control.values):
            writer.writerow((repr(float(t)), repr(float(u))))
    return path


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "resolved_config": manifest.resolved_config,
        "cost_value": manifest.cost_value,
        "iterations": manifest.iterations,
        "converged": manifest.converged,
        "residuals": list(manifest.residuals),
        "duration_seconds": manifest.duration_seconds,
        "artifacts": list(manifest.artifacts),
        "tool_version": manifest.tool_version,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> RunManifest:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunManifest(
        resolved_config=dict(payload["resolved_config"]),
        cost_value=float(payload["cost_value"]),
        iterations=int(payload["iterations"]),
        converged=bool(payload["converged"]),
        residuals=tuple(float(r) for r in payload["residuals"]),
        duration_seconds=float(payload["duration_seconds"]),
        artifacts=tuple(payload["artifacts"]),
        tool_version=str(payload["tool_version"]),
    )


def config_from_manifest(manifest: RunManifest) -> ScenarioConfig:
    """Rebuild the exact run configuration a manifest records."""
    return load_config(overrides=manifest.resolved_config)


def run_scenario(cfg: ScenarioConfig, scenario: str | None = None) -> RunManifest:
    """Execute one run and persist its artifacts; returns the manifest.

    Partial artifacts are removed if any step fails, so an output directory
    never holds a half-written run.
    """
    start = time.perf_counter()
    grid = cfg.grid
    if scenario is None:
        scenario = scenario_name(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.control_enabled:
        res = fbs_solve(cfg.params, cfg.x0, grid,
                        SweepConfig(adjoint_mode=cfg.adjoint_mode, cost=cfg.cost))
        x, l, u = res.state_traj, res.adjoint_traj, res.control
        cost_value = res.cost_value
        iterations = res.iterations
        converged = res.converged
        residuals = tuple(float(r) for r in res.per_iteration_residuals)
    else:
        u = ControlGrid.constant(0.0, grid.t0, grid.tf, grid.n)
        x = rk4_forward(state_rhs_fn(cfg.params), cfg.x0, u, grid)
        l = None
        cost_value = integrate_cost(cfg.params, x, u, cfg.cost)
        iterations, converged, residuals = 0, True, ()

    created: list[Path] = []
    try:
        traj_csv = write_csv(x, u, l, out_dir / f"{scenario}_trajectory.csv")
        created.append(traj_csv)
        created.append(_write_control_csv(u, out_dir / f"{scenario}_control.csv"))
        created.extend(render_plots(
            [traj_csv], PlotSpec(scenario=scenario, kinds=("states", "control"),
                                 out_dir=out_dir)))
        manifest = RunManifest(
            resolved_config=as_flat_dict(cfg),
            cost_value=cost_value,
            iterations=iterations,
            converged=converged,
            residuals=residuals,
            duration_seconds=time.perf_counter() - start,
            artifacts=tuple(p.name for p in created),
            tool_version=_tool_version(),
        )
        write_manifest(manifest, out_dir / f"{scenario}_manifest.json")
    except BaseException:
        for p in created:
            p.unlink(missing_ok=True)
        raise
    return manifest


def run_sweep(cfg: ScenarioConfig) -> list[RunManifest]:
    """One solve per requested net-usage level, plus combined artifacts.

    Member failures are isolated: the failing level is logged and skipped,
    the rest of the sweep completes. The last error is re-raised only if
    every member failed.
    """
    if not cfg.sweep_b:
        raise InvariantViolation("run_sweep requires a nonempty sweep_b list")
    manifests: list[RunManifest] = []
    member_csvs: list[Path] = []
    labels: list[str] = []
    last_error: Exception | None = None
    out_dir = Path(cfg.output_dir)
    for b in cfg.sweep_b:
        member = replace(cfg, params=replace(cfg.params, b=float(b)), sweep_b=None)
        try:
            manifest = run_scenario(member)
        except Exception as e:
            logger.warning("sweep member b=%g failed: %s", b, e)
            last_error = e
            continue
        manifests.append(manifest)
        member_csvs.append(out_dir / f"{scenario_name(member)}_trajectory.csv")
        labels.append(f"b={b:g}")
    if not manifests:
        assert last_error is not None
        raise last_error

    name = f"sweep_{cfg.cost.value}" if cfg.control_enabled else f"sweep_uncontrolled_{cfg.cost.value}"
    _write_sweep_comparison_csv(member_csvs, labels, out_dir / f"{name}_comparison.csv")
    render_plots(member_csvs, PlotSpec(
        scenario=name,
        kinds=("susceptible-humans", "infectious-humans", "control"),
        out_dir=out_dir,
        labels=tuple(labels)))
    return manifests


def _write_sweep_comparison_csv(member_csvs: list[Path], labels: list[str],
                                path: Path) -> Path:
    # side-by-side columns for the compartments the overlay figures show
    columns = [read_trajectory_csv(p) for p in member_csvs]
    header = ["t"]
    for label in labels:
        suffix = label.replace("=", "")
        header.extend((f"S_h_{suffix}", f"I_h_{suffix}", f"u_{suffix}"))
    t = columns[0]["t"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for j in range(t.size):
            row = [repr(float(t[j]))]
            for cols in columns:
                row.extend(repr(float(cols[name][j])) for name in ("S_h", "I_h", "u"))
            writer.writerow(row)
    return path


def compare_costs(cfg: ScenarioConfig) -> tuple[RunManifest, RunManifest]:
    """Solve with both cost functionals and overlay the outcomes.

    Returns the host-only-cost manifest first, then the host+vector one.
    """
    b = f"{cfg.params.b:g}"
    base = replace(cfg, control_enabled=True, sweep_b=None)
    out_dir = Path(cfg.output_dir)
    pair: list[RunManifest] = []
    csvs: list[Path] = []
    for kind in (CostKind.HOST_ONLY, CostKind.HOST_VECTOR):
        member = replace(base, cost=kind)
        scenario = f"compare_b{b}_{kind.value}"
        pair.append(run_scenario(member, scenario=scenario))
        csvs.append(out_dir / f"{scenario}_trajectory.csv")
    render_plots(csvs, PlotSpec(
        scenario=f"compare_b{b}",
        kinds=("hosts", "vectors", "control"),
        out_dir=out_dir,
        labels=("host-only cost (j1)", "host+vector cost (j2)")))
    return pair[0], pair[1]
