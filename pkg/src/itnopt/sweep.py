"""Forward-backward sweep solver for the optimal net-supervision control.

Each iteration integrates the states forward under the current control,
integrates the costates backward from a zero terminal condition, and then
relaxes the control toward the pointwise projection of the optimality
condition. Iteration stops when states, costates, and control all pass a
scale-free relative-change test, or when the iteration budget runs out
(reported via the converged flag, never raised).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .integrators import TimeGrid, Trajectory, integrate_cost, rk4_backward, rk4_forward
from .model import (
    AdjointMode,
    ControlGrid,
    CostKind,
    ModelParams,
    StateVec,
    adjoint_rhs_fn,
    control_projection_fn,
    state_rhs_fn,
)


@dataclass(frozen=True)
class SweepConfig:
    """Iteration knobs for fbs_solve.

    relaxation is the weight on the freshly projected control in the convex
    combination with the previous iterate; tol is the relative-change
    tolerance of the stopping test; initial_guess of None means start from
    the zero control, which makes iteration one the uncontrolled baseline.
    """

    relaxation: float = 0.5
    tol: float = 1e-3
    max_iters: int = 500
    adjoint_mode: AdjointMode = AdjointMode.DECOUPLED
    cost: CostKind = CostKind.HOST_ONLY
    initial_guess: ControlGrid | None = None

    def __post_init__(self):
        if not (0.0 < self.relaxation <= 1.0):
            raise InvariantViolation(
                f"relaxation must lie in (0, 1], got {self.relaxation!r}")
        if not (self.tol > 0.0):
            raise InvariantViolation(f"tol must be > 0, got {self.tol!r}")
        if self.max_iters < 1:
            raise InvariantViolation(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Converged (or best-effort) solution triple plus iteration diagnostics.

    cost_value is the objective of the returned state/control pair.
    per_iteration_costs[k] is the objective of the control in force during
    iteration k, so for the zero initial guess entry 0 is the uncontrolled
    cost. per_iteration_residuals[k] is the worst relative change across all
    tracked variables at iteration k.
    """

    state_traj: Trajectory
    adjoint_traj: Trajectory
    control: ControlGrid
    cost_value: float
    iterations: int
    converged: bool
    per_iteration_residuals: np.ndarray
    per_iteration_costs: np.ndarray

    def __post_init__(self):
        for name in ("per_iteration_residuals", "per_iteration_costs"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def convergence_test(prev, next_, tol: float) -> bool:
    """Relative-change stopping test over a set of sampled variables.

    Passes iff every variable v satisfies tol * sum|next_v| >= sum|next_v -
    prev_v|. Scale-free; a zero next_v passes only against a zero prev_v.
    """
    if len(prev) != len(next_):
        raise InvariantViolation("prev and next variable lists differ in length")
    for a, b in zip(prev, next_):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise InvariantViolation("prev/next sample counts differ")
        if tol * np.abs(b).sum() - np.abs(b - a).sum() < 0.0:
            return False
    return True


def _worst_relative_change(prev, next_) -> float:
    worst = 0.0
    for a, b in zip(prev, next_):
        scale = float(np.abs(b).sum())
        change = float(np.abs(b - a).sum())
        if scale == 0.0:
            worst = max(worst, 0.0 if change == 0.0 else np.inf)
        else:
            worst = max(worst, change / scale)
    return worst


def update_control(prev: ControlGrid, x: Trajectory, l: Trajectory,
                   p: ModelParams, relaxation: float) -> ControlGrid:
    """Relaxed projection step: (1-w)*prev + w*clamped optimality formula."""
    g = x.grid
    if (prev.t0, prev.tf, prev.n) != (g.t0, g.tf, g.n) or l.grid != g:
        raise InvariantViolation("control and trajectories must share one grid")
    target = control_projection_fn(p)(x.samples, l.samples)
    vals = (1.0 - relaxation) * prev.values + relaxation * target
    return ControlGrid(g.t0, g.tf, g.n, np.clip(vals, 0.0, 1.0))


def _tracked(x_samples: np.ndarray, l_samples: np.ndarray, u_values: np.ndarray):
    # 9 variables enter the stopping test: 4 states, 4 costates, control.
    return ([x_samples[:, i] for i in range(4)]
            + [l_samples[:, i] for i in range(4)]
            + [u_values])


def fbs_solve(p: ModelParams, x0: StateVec, grid: TimeGrid,
              cfg: SweepConfig) -> SolveResult:
    """Solve the optimality system by forward-backward sweeping.

    Returns the refreshed triple: after the control is accepted, states and
    costates are re-integrated under it once more, so the returned
    trajectories solve their systems under the returned control exactly (up
    to integrator error). Non-convergence within max_iters is reported with
    converged=False on the best iterate, not raised.
    """
    s_rhs = state_rhs_fn(p)
    a_rhs = adjoint_rhs_fn(p, cfg.adjoint_mode, cfg.cost)
    if cfg.initial_guess is None:
        u = ControlGrid.constant(0.0, grid.t0, grid.tf, grid.n)
    else:
        u = cfg.initial_guess
        if (u.t0, u.tf, u.n) != (grid.t0, grid.tf, grid.n):
            raise InvariantViolation("initial guess must live on the solve grid")

    zero4 = np.zeros(4)
    # Zero sentinels: iteration one always fails the test against them, so a
    # single sweep can never report convergence spuriously.
    prev_x = np.zeros((grid.n + 1, 4))
    prev_l = np.zeros((grid.n + 1, 4))
    residuals: list[float] = []
    costs: list[float] = []
    converged = False
    iterations = 0

    for _ in range(cfg.max_iters):
        x = rk4_forward(s_rhs, x0, u, grid)
        l = rk4_backward(a_rhs, zero4, x, u, grid)
        u_new = update_control(u, x, l, p, cfg.relaxation)
        iterations += 1
        costs.append(integrate_cost(p, x, u, cfg.cost))
        prev_vars = _tracked(prev_x, prev_l, u.values)
        next_vars = _tracked(x.samples, l.samples, u_new.values)
        residuals.append(_worst_relative_change(prev_vars, next_vars))
        ok = convergence_test(prev_vars, next_vars, cfg.tol)
        prev_x, prev_l = x.samples, l.samples
        u = u_new
        if ok:
            converged = True
            break

    # Refresh so the returned trajectories correspond to the accepted control.
    x = rk4_forward(s_rhs, x0, u, grid)
    l = rk4_backward(a_rhs, zero4, x, u, grid)
    return SolveResult(
        state_traj=x,
        adjoint_traj=l,
        control=u,
        cost_value=integrate_cost(p, x, u, cfg.cost),
        iterations=iterations,
        converged=converged,
        per_iteration_residuals=np.array(residuals),
        per_iteration_costs=np.array(costs),
    )
