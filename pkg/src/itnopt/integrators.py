"""Fixed-step classical RK4 integration on a shared uniform time grid.

Forward integration advances states; backward integration advances costates
from a terminal condition down to the start time. Grid-valued inputs (the
control, and the frozen state trajectory during backward passes) are sampled
at the RK4 stage times by linear interpolation, which for same-grid inputs
reduces to the node values and midpoint averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, NegativeState, NonFinite
from .model import ControlGrid, CostKind, ModelParams, StateVec, running_cost_fn


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of n intervals on [t0, tf]; h = (tf - t0) / n."""

    t0: float
    tf: float
    n: int

    def __post_init__(self):
        if not (self.tf > self.t0):
            raise InvariantViolation(f"tf must exceed t0, got [{self.t0}, {self.tf}]")
        if self.n < 1:
            raise InvariantViolation(f"n must be >= 1, got {self.n}")

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.n + 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """n+1 samples of a vector quantity on a TimeGrid, one row per node."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] != self.grid.n + 1:
            raise InvariantViolation(
                f"trajectory needs {self.grid.n + 1} rows, got shape {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]


def _as_state_array(x0) -> np.ndarray:
    if isinstance(x0, StateVec):
        return x0.as_array()
    a = np.atleast_1d(np.asarray(x0, dtype=float))
    if a.ndim != 1:
        raise InvariantViolation("initial state must be a flat vector")
    return a


def _control_on_grid(u: ControlGrid, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    # Node and midpoint samples of u on the integration grid. Same-grid
    # controls take the exact fast path so repeated sweeps stay bit-stable.
    if u.t0 == grid.t0 and u.tf == grid.tf and u.n == grid.n:
        nodes = np.asarray(u.values, dtype=float)
        return nodes, 0.5 * (nodes[:-1] + nodes[1:])
    if not (u.t0 <= grid.t0 and u.tf >= grid.tf):
        raise InvariantViolation("control grid does not cover the integration span")
    times = grid.times
    nodes = np.interp(times, u.times, u.values)
    mids = np.interp(0.5 * (times[:-1] + times[1:]), u.times, u.values)
    return nodes, mids


def rk4_forward(rhs, x0, u: ControlGrid, grid: TimeGrid) -> Trajectory:
    """Integrate dx/dt = rhs(t, x, u(t)) from t0 to tf with classical RK4.

    rhs takes (t, state array, control value) and returns the derivative
    array. Raises NegativeState when a component drops below
    -1e-9 * sum|x0| (the grid is too coarse or the inputs invalid), and
    NonFinite on overflow or NaN.
    """
    x0 = _as_state_array(x0)
    h = grid.h
    half = 0.5 * h
    times = grid.times
    u_nodes, u_mids = _control_on_grid(u, grid)
    floor = -1e-9 * float(np.abs(x0).sum())
    out = np.empty((grid.n + 1, x0.size))
    out[0] = x0
    x = x0
    for j in range(grid.n):
        t = times[j]
        um = u_mids[j]
        k1 = rhs(t, x, u_nodes[j])
        k2 = rhs(t + half, x + half * k1, um)
        k3 = rhs(t + half, x + half * k2, um)
        k4 = rhs(t + h, x + h * k3, u_nodes[j + 1])
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"non-finite state at t={times[j + 1]!r} (step {j + 1})")
        if x.min() < floor:
            raise NegativeState(
                f"state component {x.min()!r} below {floor!r} at t={times[j + 1]!r}")
        out[j + 1] = x
    return Trajectory(grid, out)


def rk4_backward(rhs, l_tf, x: Trajectory, u: ControlGrid, grid: TimeGrid) -> Trajectory:
    """Integrate dl/dt = rhs(t, l, x(t), u(t)) from tf down to t0.

    The state trajectory and control are linearly interpolated at the stage
    times t, t - h/2, t - h. Samples are returned in forward time order, so
    the terminal condition sits in the last row. Raises NonFinite on
    overflow or NaN.
    """
    if x.grid != grid:
        raise InvariantViolation("state trajectory grid differs from integration grid")
    l_tf = _as_state_array(l_tf)
    h = grid.h
    half = 0.5 * h
    times = grid.times
    xs = x.samples
    x_mids = 0.5 * (xs[:-1] + xs[1:])
    u_nodes, u_mids = _control_on_grid(u, grid)
    out = np.empty((grid.n + 1, l_tf.size))
    out[grid.n] = l_tf
    lam = l_tf
    for j in range(grid.n, 0, -1):
        t = times[j]
        xm, um = x_mids[j - 1], u_mids[j - 1]
        k1 = rhs(t, lam, xs[j], u_nodes[j])
        k2 = rhs(t - half, lam - half * k1, xm, um)
        k3 = rhs(t - half, lam - half * k2, xm, um)
        k4 = rhs(t - h, lam - h * k3, xs[j - 1], u_nodes[j - 1])
        lam = lam - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(lam)):
            raise NonFinite(f"non-finite costate at t={times[j - 1]!r} (step {j - 1})")
        out[j - 1] = lam
    return Trajectory(grid, out)


def trapezoid(values: np.ndarray, h: float) -> float:
    """Composite trapezoidal rule over uniformly spaced samples."""
    values = np.asarray(values, dtype=float)
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))


def integrate_cost(p: ModelParams, x: Trajectory, u: ControlGrid,
                   which: CostKind) -> float:
    """Total cost of a trajectory-control pair by trapezoidal quadrature."""
    if x.grid.n != u.n or x.grid.t0 != u.t0 or x.grid.tf != u.tf:
        raise InvariantViolation("trajectory and control are on different grids")
    rate = running_cost_fn(p, which)(x.samples, u.values)
    return trapezoid(rate, x.grid.h)
