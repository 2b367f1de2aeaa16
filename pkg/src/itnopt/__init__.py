"""Optimal control of insecticide-treated-net usage in a malaria model.

Forward-backward sweep solver for a controlled host-vector transmission
system, with an independent projected-gradient oracle, finite-difference
gradient checks, scenario configuration, CSV/SVG artifacts, and a CLI.
"""

__version__ = "1.0.0"

from .config import ScenarioConfig, as_flat_dict, load_config, write_config
from .errors import (
    DegenerateDirection,
    InvariantViolation,
    ItnOptError,
    MissingArtifact,
    NegativeState,
    NonFinite,
    NonpositivePopulation,
    ParseError,
    UnknownKey,
)
from .integrators import TimeGrid, Trajectory, integrate_cost, rk4_backward, rk4_forward
from .model import (
    AdjointMode,
    AdjointVec,
    ControlGrid,
    CostKind,
    ItnMortalityPolicy,
    ModelParams,
    StateVec,
    adjoint_rhs,
    contact_rate,
    forces_of_infection,
    hamiltonian,
    pointwise_optimal_control,
    running_cost,
    state_rhs,
    vector_mortality,
)
from .scenarios import (
    RunManifest,
    TABLE_B_VALUES,
    compare_costs,
    config_from_manifest,
    read_manifest,
    run_scenario,
    run_sweep,
    scenario_name,
    write_csv,
    write_manifest,
)
from .sweep import SolveResult, SweepConfig, convergence_test, fbs_solve, update_control
from .verification import (
    ArmijoParams,
    CrossValidationReport,
    GradCheckReport,
    cost_gradient_adjoint,
    cross_validate,
    direct_solve_projected_gradient,
    finite_difference_gradient_check,
)
from .plots import PlotSpec, read_trajectory_csv, render_plots

__all__ = [
    "AdjointMode",
    "AdjointVec",
    "ArmijoParams",
    "ControlGrid",
    "CostKind",
    "CrossValidationReport",
    "DegenerateDirection",
    "GradCheckReport",
    "InvariantViolation",
    "ItnMortalityPolicy",
    "ItnOptError",
    "MissingArtifact",
    "ModelParams",
    "NegativeState",
    "NonFinite",
    "NonpositivePopulation",
    "ParseError",
    "PlotSpec",
    "RunManifest",
    "ScenarioConfig",
    "SolveResult",
    "StateVec",
    "SweepConfig",
    "TABLE_B_VALUES",
    "TimeGrid",
    "Trajectory",
    "UnknownKey",
    "__version__",
    "adjoint_rhs",
    "as_flat_dict",
    "compare_costs",
    "config_from_manifest",
    "contact_rate",
    "convergence_test",
    "cost_gradient_adjoint",
    "cross_validate",
    "direct_solve_projected_gradient",
    "finite_difference_gradient_check",
    "fbs_solve",
    "forces_of_infection",
    "hamiltonian",
    "integrate_cost",
    "load_config",
    "pointwise_optimal_control",
    "read_manifest",
    "read_trajectory_csv",
    "render_plots",
    "rk4_backward",
    "rk4_forward",
    "run_scenario",
    "run_sweep",
    "running_cost",
    "scenario_name",
    "state_rhs",
    "update_control",
    "vector_mortality",
    "write_config",
    "write_csv",
    "write_manifest",
]
