"""Independent correctness oracles for the sweep solver.

Two layers of defense: (1) the adjoint-based cost gradient is checked against
central finite differences along random admissible directions, and (2) a
self-contained projected-gradient method minimizes the same discretized cost
directly, so the sweep solver can be cross-validated without trusting any of
the machinery it shares with the oracle beyond the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, InvariantViolation
from .integrators import TimeGrid, Trajectory, integrate_cost, rk4_backward, rk4_forward
from .model import (
    AdjointMode,
    ControlGrid,
    CostKind,
    ModelParams,
    StateVec,
    adjoint_rhs_fn,
    contact_rate,
    state_rhs_fn,
)
from .sweep import SolveResult, SweepConfig, fbs_solve


@dataclass(frozen=True)
class ArmijoParams:
    """Backtracking line-search knobs for the projected-gradient solver.

    Step size starts at initial_step, grows by `growth` (capped at max_step)
    at the top of every outer iteration, and shrinks by `shrink` until the
    sufficient-decrease condition with coefficient c1 holds.
    """

    c1: float = 1e-4
    shrink: float = 0.5
    growth: float = 2.0
    max_step: float = 1e3
    max_backtracks: int = 60
    initial_step: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.c1 < 1.0):
            raise InvariantViolation(f"c1 must lie in (0, 1), got {self.c1!r}")
        if not (0.0 < self.shrink < 1.0):
            raise InvariantViolation(f"shrink must lie in (0, 1), got {self.shrink!r}")
        if not (self.growth >= 1.0):
            raise InvariantViolation(f"growth must be >= 1, got {self.growth!r}")
        if not (self.max_step > 0.0 and self.initial_step > 0.0):
            raise InvariantViolation("step sizes must be positive")
        if self.max_backtracks < 1:
            raise InvariantViolation("max_backtracks must be >= 1")


@dataclass(frozen=True, eq=False)
class GradCheckReport:
    """Outcome of a finite-difference check of the adjoint gradient."""

    directions_tested: int
    max_rel_error: float
    per_direction_errors: np.ndarray

    def __post_init__(self):
        errs = np.asarray(self.per_direction_errors, dtype=float).copy()
        errs.setflags(write=False)
        object.__setattr__(self, "per_direction_errors", errs)
        if self.directions_tested < 1 or errs.size != self.directions_tested:
            raise InvariantViolation("report needs >= 1 direction with one error each")
        if errs.min() < 0.0 or self.max_rel_error != errs.max():
            raise InvariantViolation("errors must be >= 0 with max_rel_error their max")


@dataclass(frozen=True)
class CrossValidationReport:
    """Cost agreement between the sweep solver and the direct oracle."""

    j_fbs: float
    j_direct: float
    rel_gap: float
    control_l2_distance: float

    def __post_init__(self):
        expected = abs(self.j_fbs - self.j_direct) / max(abs(self.j_fbs), 1.0)
        if not np.isclose(self.rel_gap, expected, rtol=1e-12, atol=0.0):
            raise InvariantViolation("rel_gap must equal |j_fbs-j_direct|/max(|j_fbs|,1)")
        if self.control_l2_distance < 0.0:
            raise InvariantViolation("control_l2_distance must be >= 0")


def _trapezoid_weights(grid: TimeGrid) -> np.ndarray:
    w = np.full(grid.n + 1, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return w


def _gradient_pieces(p: ModelParams, x0: StateVec, u: ControlGrid,
                     grid: TimeGrid, which: CostKind):
    # One forward and one exact-mode backward pass; the decoupled costate
    # system is not the derivative of the cost and is never used here.
    x = rk4_forward(state_rhs_fn(p), x0, u, grid)
    l = rk4_backward(adjoint_rhs_fn(p, AdjointMode.EXACT, which),
                     np.zeros(4), x, u, grid)
    n_h = x.samples[:, 0] + x.samples[:, 1]
    lam_h = p.p1 * contact_rate(p) * x.samples[:, 3] / n_h
    g = p.c * u.values + (l.samples[:, 0] - l.samples[:, 1]) * lam_h * x.samples[:, 0]
    return g, x, l


def cost_gradient_adjoint(p: ModelParams, x0: StateVec, u: ControlGrid,
                          grid: TimeGrid, which: CostKind) -> np.ndarray:
    """L2 gradient of the total cost with respect to the control samples.

    Returns c*u + (l1 - l2)*lam_h*s_h on the grid, evaluated along the state
    trajectory induced by u with the exact-mode costates. Pairing with a
    direction via the trapezoid inner product gives the directional
    derivative of the continuous cost.
    """
    g, _, _ = _gradient_pieces(p, x0, u, grid, which)
    return g


def finite_difference_gradient_check(p: ModelParams, x0: StateVec, u: ControlGrid,
                                     grid: TimeGrid, which: CostKind,
                                     n_directions: int = 20, epsilon: float = 1e-5,
                                     seed: int = 0) -> GradCheckReport:
    """Compare adjoint directional derivatives against central differences.

    Directions are random five-mode cosine series, peak-normalized, then
    zeroed at samples within epsilon of the control bounds so both perturbed
    controls stay admissible. Raises DegenerateDirection when a direction
    vanishes entirely (e.g. the control sits at a bound everywhere).
    """
    if n_directions < 1:
        raise InvariantViolation(f"n_directions must be >= 1, got {n_directions}")
    if not (epsilon > 0.0):
        raise InvariantViolation(f"epsilon must be > 0, got {epsilon!r}")
    rng = np.random.default_rng(seed)
    g, _, _ = _gradient_pieces(p, x0, u, grid, which)
    w = _trapezoid_weights(grid)
    s_rhs = state_rhs_fn(p)
    phase = np.pi * (grid.times - grid.t0) / (grid.tf - grid.t0)
    uv = u.values
    movable = (uv >= epsilon) & (uv <= 1.0 - epsilon)
    errors = np.empty(n_directions)
    for i in range(n_directions):
        coef = rng.uniform(-1.0, 1.0, 5)
        v = sum(coef[k] * np.cos(k * phase) for k in range(5))
        peak = np.abs(v).max()
        if peak == 0.0:
            raise DegenerateDirection("sampled direction has zero norm")
        v = np.where(movable, v / peak, 0.0)
        if np.abs(v).max() == 0.0:
            raise DegenerateDirection(
                "direction vanished after masking samples at the control bounds")
        # clip is a pure roundoff guard; the masking keeps u +/- eps*v in box
        up = ControlGrid(grid.t0, grid.tf, grid.n, np.clip(uv + epsilon * v, 0.0, 1.0))
        um = ControlGrid(grid.t0, grid.tf, grid.n, np.clip(uv - epsilon * v, 0.0, 1.0))
        jp = integrate_cost(p, rk4_forward(s_rhs, x0, up, grid), up, which)
        jm = integrate_cost(p, rk4_forward(s_rhs, x0, um, grid), um, which)
        dd_fd = (jp - jm) / (2.0 * epsilon)
        dd_adj = float(np.dot(w * g, v))
        errors[i] = abs(dd_adj - dd_fd) / max(abs(dd_fd), 1e-12)
    return GradCheckReport(n_directions, float(errors.max()), errors)


def direct_solve_projected_gradient(p: ModelParams, x0: StateVec, grid: TimeGrid,
                                    which: CostKind = CostKind.HOST_ONLY,
                                    max_iters: int = 400,
                                    step_rule: ArmijoParams | None = None,
                                    stop_rtol: float = 1e-4) -> SolveResult:
    """Minimize the discretized cost directly over box-constrained controls.

    Projected gradient with Armijo backtracking from the zero control. After
    each accepted step the projected-gradient residual |u - clamp(u - g)| in
    the trapezoid L2 norm is tested against stop_rtol*(1 + |J|); the result
    reports converged=False when the budget runs out or the line search
    stalls. The returned costates come from a final exact-mode backward pass,
    so the result has the same shape as a sweep-solver result.
    """
    ar = step_rule if step_rule is not None else ArmijoParams()
    s_rhs = state_rhs_fn(p)
    w = _trapezoid_weights(grid)

    def evaluate(values: np.ndarray) -> tuple[ControlGrid, float]:
        ug = ControlGrid(grid.t0, grid.tf, grid.n, values)
        return ug, integrate_cost(p, rk4_forward(s_rhs, x0, ug, grid), ug, which)

    uv = np.zeros(grid.n + 1)
    ug, j = evaluate(uv)
    g, _, _ = _gradient_pieces(p, x0, ug, grid, which)
    costs = [j]
    residuals: list[float] = []
    alpha = ar.initial_step
    iterations = 0
    converged = False
    for _ in range(max_iters):
        alpha = min(alpha * ar.growth, ar.max_step)
        accepted = False
        for _ in range(ar.max_backtracks):
            trial = np.clip(uv - alpha * g, 0.0, 1.0)
            ug_t, j_t = evaluate(trial)
            if j_t <= j + ar.c1 * float(np.dot(w * g, trial - uv)):
                accepted = True
                break
            alpha *= ar.shrink
        if not accepted:
            break
        uv, ug, j = trial, ug_t, j_t
        g, _, _ = _gradient_pieces(p, x0, ug, grid, which)
        costs.append(j)
        iterations += 1
        res_vec = uv - np.clip(uv - g, 0.0, 1.0)
        res = float(np.sqrt(np.dot(w, res_vec * res_vec)))
        residuals.append(res)
        if res <= stop_rtol * (1.0 + abs(j)):
            converged = True
            break

    x = rk4_forward(s_rhs, x0, ug, grid)
    l = rk4_backward(adjoint_rhs_fn(p, AdjointMode.EXACT, which),
                     np.zeros(4), x, ug, grid)
    return SolveResult(
        state_traj=x,
        adjoint_traj=l,
        control=ug,
        cost_value=integrate_cost(p, x, ug, which),
        iterations=iterations,
        converged=converged,
        per_iteration_residuals=np.array(residuals),
        per_iteration_costs=np.array(costs),
    )


def cross_validate(p: ModelParams, x0: StateVec, grid: TimeGrid,
                   cfg: SweepConfig) -> CrossValidationReport:
    """Run both solvers on one grid and cost; report their cost agreement."""
    fbs = fbs_solve(p, x0, grid, cfg)
    direct = direct_solve_projected_gradient(p, x0, grid, which=cfg.cost)
    w = _trapezoid_weights(grid)
    d = fbs.control.values - direct.control.values
    return CrossValidationReport(
        j_fbs=fbs.cost_value,
        j_direct=direct.cost_value,
        rel_gap=abs(fbs.cost_value - direct.cost_value) / max(abs(fbs.cost_value), 1.0),
        control_l2_distance=float(np.sqrt(np.dot(w, d * d))),
    )
