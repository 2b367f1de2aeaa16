"""Gradient checks and the direct projected-gradient oracle."""

import numpy as np
import pytest

from itnopt import (
    ArmijoParams,
    ControlGrid,
    CostKind,
    CrossValidationReport,
    DegenerateDirection,
    GradCheckReport,
    InvariantViolation,
    ModelParams,
    StateVec,
    SweepConfig,
    TimeGrid,
    AdjointMode,
    cost_gradient_adjoint,
    cross_validate,
    direct_solve_projected_gradient,
    fbs_solve,
    finite_difference_gradient_check,
    vector_mortality,
)

P = ModelParams()
X0 = StateVec(800.0, 200.0, 4000.0, 900.0)


def test_armijo_params_validation():
    ArmijoParams()
    with pytest.raises(InvariantViolation):
        ArmijoParams(c1=0.0)
    with pytest.raises(InvariantViolation):
        ArmijoParams(shrink=1.0)
    with pytest.raises(InvariantViolation):
        ArmijoParams(growth=0.5)
    with pytest.raises(InvariantViolation):
        ArmijoParams(initial_step=0.0)
    with pytest.raises(InvariantViolation):
        ArmijoParams(max_backtracks=0)


def test_grad_check_report_validation():
    GradCheckReport(2, 0.2, np.array([0.1, 0.2]))
    with pytest.raises(InvariantViolation):
        GradCheckReport(2, 0.3, np.array([0.1, 0.2]))
    with pytest.raises(InvariantViolation):
        GradCheckReport(3, 0.2, np.array([0.1, 0.2]))
    with pytest.raises(InvariantViolation):
        GradCheckReport(2, 0.2, np.array([-0.1, 0.2]))


def test_cross_validation_report_validation():
    CrossValidationReport(100.0, 101.0, 0.01, 0.5)
    with pytest.raises(InvariantViolation):
        CrossValidationReport(100.0, 101.0, 0.5, 0.5)
    with pytest.raises(InvariantViolation):
        CrossValidationReport(100.0, 101.0, 0.01, -1.0)


def test_quadratic_cost_has_linear_gradient():
    # with a1 = 0 the host-only cost ignores the states entirely, so the
    # gradient collapses to c*u and the costates vanish
    p = ModelParams(a1=0.0)
    grid = TimeGrid(0.0, 100.0, 200)
    u = ControlGrid.constant(0.5, 0.0, 100.0, 200)
    g = cost_gradient_adjoint(p, X0, u, grid, CostKind.HOST_ONLY)
    assert np.allclose(g, p.c * u.values, atol=1e-10)


def test_quadratic_cost_gradient_check_is_tight():
    p = ModelParams(a1=0.0)
    grid = TimeGrid(0.0, 100.0, 200)
    u = ControlGrid.constant(0.5, 0.0, 100.0, 200)
    rep = finite_difference_gradient_check(p, X0, u, grid, CostKind.HOST_ONLY)
    assert rep.max_rel_error <= 1e-8


def test_gradient_check_host_only():
    grid = TimeGrid(0.0, 100.0, 2000)
    u = ControlGrid.constant(0.5, 0.0, 100.0, 2000)
    rep = finite_difference_gradient_check(P, X0, u, grid, CostKind.HOST_ONLY,
                                           n_directions=20, seed=0)
    assert rep.directions_tested == 20
    assert rep.per_direction_errors.shape == (20,)
    assert rep.max_rel_error == rep.per_direction_errors.max()
    assert rep.max_rel_error <= 1e-3


def test_gradient_check_host_vector():
    grid = TimeGrid(0.0, 100.0, 2000)
    u = ControlGrid.constant(0.5, 0.0, 100.0, 2000)
    rep = finite_difference_gradient_check(P, X0, u, grid, CostKind.HOST_VECTOR,
                                           n_directions=10, seed=1)
    assert rep.max_rel_error <= 1e-3


def test_gradient_check_rejects_pinned_control():
    # every sample sits at the lower bound, so no admissible direction exists
    grid = TimeGrid(0.0, 10.0, 50)
    u = ControlGrid.constant(0.0, 0.0, 10.0, 50)
    with pytest.raises(DegenerateDirection):
        finite_difference_gradient_check(P, X0, u, grid, CostKind.HOST_ONLY)


def test_gradient_check_argument_validation():
    grid = TimeGrid(0.0, 10.0, 50)
    u = ControlGrid.constant(0.5, 0.0, 10.0, 50)
    with pytest.raises(InvariantViolation):
        finite_difference_gradient_check(P, X0, u, grid, CostKind.HOST_ONLY,
                                         n_directions=0)
    with pytest.raises(InvariantViolation):
        finite_difference_gradient_check(P, X0, u, grid, CostKind.HOST_ONLY,
                                         epsilon=0.0)


def test_direct_solver_trivial_objective():
    # a1 = 0 makes the zero control optimal; the oracle must stop right away
    p = ModelParams(a1=0.0)
    grid = TimeGrid(0.0, 50.0, 200)
    r = direct_solve_projected_gradient(p, X0, grid)
    assert r.converged
    assert r.iterations == 1
    assert np.all(r.control.values == 0.0)
    assert r.cost_value == 0.0


def test_direct_solver_disease_free():
    nv = P.lambda_v_rec / vector_mortality(P)
    x0 = StateVec(1000.0, 0.0, nv, 0.0)
    grid = TimeGrid(0.0, 50.0, 200)
    r = direct_solve_projected_gradient(P, x0, grid)
    assert r.converged
    assert np.all(r.control.values == 0.0)
    assert r.cost_value == 0.0


def test_direct_solver_cost_never_increases():
    grid = TimeGrid(0.0, 100.0, 500)
    r = direct_solve_projected_gradient(P, X0, grid)
    assert r.converged
    costs = r.per_iteration_costs
    assert costs.size == r.iterations + 1  # leading entry is the start cost
    assert np.all(np.diff(costs) <= 0.0)
    assert np.all(r.control.values >= 0.0) and np.all(r.control.values <= 1.0)


def test_direct_solver_budget_reported_not_raised():
    r = direct_solve_projected_gradient(P, X0, TimeGrid(0.0, 100.0, 300),
                                        max_iters=2)
    assert not r.converged
    assert r.iterations == 2


def test_solvers_agree_on_default_problem():
    grid = TimeGrid(0.0, 100.0, 500)
    report = cross_validate(P, X0, grid, SweepConfig(adjoint_mode=AdjointMode.EXACT))
    assert report.rel_gap <= 1e-2
    assert report.control_l2_distance <= 1.0


def test_disease_free_cross_validation_is_exact():
    nv = P.lambda_v_rec / vector_mortality(P)
    x0 = StateVec(1000.0, 0.0, nv, 0.0)
    grid = TimeGrid(0.0, 50.0, 200)
    report = cross_validate(P, x0, grid, SweepConfig())
    assert report.j_fbs == 0.0
    assert report.j_direct == 0.0
    assert report.rel_gap == 0.0
    assert report.control_l2_distance == 0.0


def test_gradient_matches_sweep_stationarity():
    # at the exact-mode sweep solution the gradient must vanish wherever the
    # control is interior
    grid = TimeGrid(0.0, 100.0, 1000)
    r = fbs_solve(P, X0, grid, SweepConfig(adjoint_mode=AdjointMode.EXACT))
    assert r.converged
    g = cost_gradient_adjoint(P, X0, r.control, grid, CostKind.HOST_ONLY)
    interior = (r.control.values > 1e-3) & (r.control.values < 1.0 - 1e-3)
    assert interior.any()
    assert np.abs(g[interior]).max() <= 0.05
