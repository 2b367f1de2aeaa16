"""Core host-vector malaria model with an insecticide-treated-net control.

Humans split into susceptible (s_h) and infectious (i_h) compartments,
mosquitoes into susceptible (s_v) and infectious (i_v). Bed-net usage at
proportion b lowers the mosquito-human contact rate and raises mosquito
mortality. The time-varying control u in [0,1] is the supervision effort
that scales down new human infections through a (1-u) factor.

This module holds the parameter set, the point types, and every pure
evaluation function: derived rates, forces of infection, state derivatives,
running costs, the Hamiltonian, the costate (adjoint) derivatives in two
modes, and the pointwise optimal-control law. Everything is a pure function
of its inputs and safe to call from multiple threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvariantViolation, NonpositivePopulation


class ItnMortalityPolicy(enum.Enum):
    """How the ITN-induced mosquito mortality term is formed.

    PRODUCT: mortality rises linearly with usage, mu_v1 + mu_max * b.
    FIXED_TERM: the increment is a constant add-on, mu_v1 + mu_max,
    independent of b.
    """

    PRODUCT = "product"
    FIXED_TERM = "fixed_term"


class AdjointMode(enum.Enum):
    """Which costate system the backward integration uses.

    DECOUPLED: the forces of infection and the total populations are treated
    as fixed external signals when differentiating the Hamiltonian. The host
    costate pair (l1, l2) then evolves independently of the vector pair
    (l3, l4). This is the mode used for headline reproduction runs.

    EXACT: the full analytic negative gradient of the Hamiltonian, with the
    chain rule carried through the forces of infection and the total host
    population. Required wherever a consistent cost gradient matters.
    """

    DECOUPLED = "decoupled"
    EXACT = "exact"


class CostKind(enum.Enum):
    """Running-cost selector.

    HOST_ONLY (token "j1"): weighs infectious humans and control effort.
    HOST_VECTOR (token "j2"): additionally weighs infectious mosquitoes.
    """

    HOST_ONLY = "j1"
    HOST_VECTOR = "j2"


@dataclass(frozen=True)
class ModelParams:
    """All model rates, probabilities, and cost weights.

    Defaults are the standard scenario values for a 1000-human,
    ~5000-mosquito setting with nets in use by 75% of hosts.

    Units: rates are per day; lambda_h_rec and lambda_v_rec are
    recruitment flows (individuals/day); a1, a2 are cost weights per
    infectious individual-day; c is the effort weight (cost * day).
    """

    lambda_h_rec: float = 1000.0 / (70.0 * 365.0)
    lambda_v_rec: float = 10000.0 / 21.0
    mu_h: float = 1.0 / (70.0 * 365.0)
    delta_h: float = 1e-3
    gamma_h: float = 0.25
    mu_v1: float = 1.0 / 21.0
    mu_max: float = 1.0 / 21.0
    b: float = 0.75
    beta_max: float = 0.1
    p1: float = 1.0
    p2: float = 1.0
    a1: float = 25.0
    a2: float = 25.0
    c: float = 50.0
    itn_mortality_policy: ItnMortalityPolicy = ItnMortalityPolicy.PRODUCT

    def __post_init__(self):
        for name in ("lambda_h_rec", "lambda_v_rec", "mu_h", "delta_h",
                     "gamma_h", "mu_max", "beta_max", "a1", "a2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise InvariantViolation(f"{name} must be finite and >= 0, got {v!r}")
        if not (math.isfinite(self.mu_v1) and self.mu_v1 > 0.0):
            raise InvariantViolation(f"mu_v1 must be > 0, got {self.mu_v1!r}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise InvariantViolation(f"c must be > 0, got {self.c!r}")
        for name in ("b", "p1", "p2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvariantViolation(f"{name} must lie in [0, 1], got {v!r}")
        if not isinstance(self.itn_mortality_policy, ItnMortalityPolicy):
            raise InvariantViolation("itn_mortality_policy must be an ItnMortalityPolicy")


@dataclass(frozen=True)
class StateVec:
    """One sample of the four population compartments (counts, >= 0)."""

    s_h: float
    i_h: float
    s_v: float
    i_v: float

    def __post_init__(self):
        for name in ("s_h", "i_h", "s_v", "i_v"):
            if not math.isfinite(getattr(self, name)):
                raise InvariantViolation(f"state component {name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.s_h, self.i_h, self.s_v, self.i_v], dtype=float)

    @classmethod
    def from_array(cls, a) -> "StateVec":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class AdjointVec:
    """One sample of the four costate values."""

    l1: float
    l2: float
    l3: float
    l4: float

    def __post_init__(self):
        for name in ("l1", "l2", "l3", "l4"):
            if not math.isfinite(getattr(self, name)):
                raise InvariantViolation(f"adjoint component {name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3, self.l4], dtype=float)

    @classmethod
    def from_array(cls, a) -> "AdjointVec":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Control samples on a uniform time grid; values must lie in [0, 1]."""

    t0: float
    tf: float
    n: int
    values: np.ndarray

    def __post_init__(self):
        if not (self.tf > self.t0):
            raise InvariantViolation(f"tf must exceed t0, got [{self.t0}, {self.tf}]")
        if self.n < 1:
            raise InvariantViolation(f"n must be >= 1, got {self.n}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n + 1,):
            raise InvariantViolation(
                f"control needs exactly n+1={self.n + 1} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvariantViolation("control samples must be finite")
        if v.min() < 0.0 or v.max() > 1.0:
            raise InvariantViolation("control samples must lie in [0, 1]")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.n + 1)

    @classmethod
    def constant(cls, level: float, t0: float, tf: float, n: int) -> "ControlGrid":
        return cls(t0, tf, n, np.full(n + 1, float(level)))


# Array-valued closure factories. These are the single implementation of the
# model equations; the public per-point operations below delegate to them, and
# the integrator and solvers call them directly on raw length-4 arrays.

@lru_cache(maxsize=None)
def _derived_rates(p: ModelParams) -> tuple[float, float]:
    beta = p.beta_max * (1.0 - p.b)
    if p.itn_mortality_policy is ItnMortalityPolicy.PRODUCT:
        mu_vb = p.mu_v1 + p.mu_max * p.b
    else:
        mu_vb = p.mu_v1 + p.mu_max
    return beta, mu_vb


@lru_cache(maxsize=None)
def state_rhs_fn(p: ModelParams):
    """Return f(t, x, u) -> dx/dt for length-4 state arrays."""
    beta, mu_vb = _derived_rates(p)
    lam_h_r, lam_v_r = p.lambda_h_rec, p.lambda_v_rec
    mu_h, gamma_h = p.mu_h, p.gamma_h
    out_h = p.mu_h + p.gamma_h + p.delta_h
    p1b, p2b, p2 = p.p1 * beta, p.p2 * beta, p.p2

    def rhs(t, x, u):
        s_h, i_h, s_v, i_v = x
        n_h = s_h + i_h
        if n_h <= 0.0:
            raise NonpositivePopulation(
                f"total host population {n_h!r} <= 0 at t={t!r}")
        lam_h = p1b * i_v / n_h
        lam_v = p2b * i_h / n_h
        new_h = (1.0 - u) * lam_h * s_h
        return np.array([
            lam_h_r - new_h + gamma_h * i_h - mu_h * s_h,
            new_h - out_h * i_h,
            lam_v_r - lam_v * s_v - mu_vb * s_v,
            p2 * lam_v * s_v - mu_vb * i_v,
        ])

    return rhs


@lru_cache(maxsize=None)
def adjoint_rhs_fn(p: ModelParams, mode: AdjointMode, which: CostKind):
    """Return f(t, l, x, u) -> dl/dt for length-4 costate arrays.

    DECOUPLED mode uses the reduced equations in which lam_h, lam_v and the
    total populations are not differentiated through; it is identical for
    both cost kinds. EXACT mode is the analytic -dH/dx for the selected cost.
    """
    beta, mu_vb = _derived_rates(p)
    mu_h, gamma_h = p.mu_h, p.gamma_h
    out_h = p.mu_h + p.gamma_h + p.delta_h
    a1 = p.a1
    a2 = p.a2 if which is CostKind.HOST_VECTOR else 0.0
    p1b, p2b, p2 = p.p1 * beta, p.p2 * beta, p.p2

    if mode is AdjointMode.DECOUPLED:
        def rhs(t, l, x, u):
            s_h, i_h, s_v, i_v = x
            n_h = s_h + i_h
            if n_h <= 0.0:
                raise NonpositivePopulation(
                    f"total host population {n_h!r} <= 0 at t={t!r}")
            lam_h = p1b * i_v / n_h
            lam_v = p2b * i_h / n_h
            l1, l2, l3, l4 = l
            w = 1.0 - u
            return np.array([
                l1 * (w * lam_h + mu_h) - l2 * lam_h * w,
                -a1 - l1 * gamma_h + l2 * out_h,
                l3 * (lam_v + mu_vb) - l4 * lam_v,
                l4 * mu_vb,
            ])

        return rhs

    def rhs(t, l, x, u):
        s_h, i_h, s_v, i_v = x
        n_h = s_h + i_h
        if n_h <= 0.0:
            raise NonpositivePopulation(
                f"total host population {n_h!r} <= 0 at t={t!r}")
        lam_h = p1b * i_v / n_h
        lam_v = p2b * i_h / n_h
        l1, l2, l3, l4 = l
        w = 1.0 - u
        # Partials of the infection flows A = lam_h*s_h and B = lam_v*s_v.
        dA_ds_h = lam_h * i_h / n_h
        dA_di_h = -lam_h * s_h / n_h
        dA_di_v = p1b * s_h / n_h
        dB_ds_h = -lam_v * s_v / n_h
        dB_di_h = s_v * (p2b - lam_v) / n_h
        host = (l1 - l2) * w
        vect = l3 - p2 * l4
        return np.array([
            host * dA_ds_h + l1 * mu_h + vect * dB_ds_h,
            -a1 - l1 * gamma_h + l2 * out_h + host * dA_di_h + vect * dB_di_h,
            l3 * (lam_v + mu_vb) - p2 * l4 * lam_v,
            -a2 + host * dA_di_v + l4 * mu_vb,
        ])

    return rhs


@lru_cache(maxsize=None)
def running_cost_fn(p: ModelParams, which: CostKind):
    """Return f(x_samples, u_values) -> running-cost array, vectorized over rows."""
    a1, half_c = p.a1, 0.5 * p.c
    a2 = p.a2 if which is CostKind.HOST_VECTOR else 0.0

    def rate(x_samples, u_values):
        x_samples = np.asarray(x_samples, dtype=float)
        u_values = np.asarray(u_values, dtype=float)
        y = a1 * x_samples[..., 1] + half_c * u_values * u_values
        if a2 != 0.0:
            y = y + a2 * x_samples[..., 3]
        return y

    return rate


@lru_cache(maxsize=None)
def control_projection_fn(p: ModelParams):
    """Return f(x_samples, l_samples) -> clamped optimal-control samples."""
    beta, _ = _derived_rates(p)
    p1b, c = p.p1 * beta, p.c

    def project(x_samples, l_samples):
        x_samples = np.asarray(x_samples, dtype=float)
        l_samples = np.asarray(l_samples, dtype=float)
        n_h = x_samples[..., 0] + x_samples[..., 1]
        lam_h = p1b * x_samples[..., 3] / n_h
        raw = lam_h * x_samples[..., 0] * (l_samples[..., 1] - l_samples[..., 0]) / c
        return np.clip(raw, 0.0, 1.0)

    return project


# Public per-point operations.

def contact_rate(p: ModelParams) -> float:
    """Mosquito-human contact rate lowered by net usage: beta_max * (1 - b)."""
    return _derived_rates(p)[0]


def vector_mortality(p: ModelParams) -> float:
    """Mosquito mortality including the ITN-induced term (policy-dependent)."""
    return _derived_rates(p)[1]


def forces_of_infection(p: ModelParams, x: StateVec) -> tuple[float, float]:
    """Per-capita infection rates (lambda_h for hosts, lambda_v for vectors).

    Raises NonpositivePopulation when the total host population is <= 0,
    which signals a trajectory that left the valid region.
    """
    n_h = x.s_h + x.i_h
    if n_h <= 0.0:
        raise NonpositivePopulation(f"total host population {n_h!r} <= 0")
    beta, _ = _derived_rates(p)
    return p.p1 * beta * x.i_v / n_h, p.p2 * beta * x.i_h / n_h


def state_rhs(p: ModelParams, x: StateVec, u: float) -> StateVec:
    """Time derivatives of the four compartments under control value u."""
    return StateVec.from_array(state_rhs_fn(p)(0.0, x.as_array(), u))


def running_cost(p: ModelParams, x: StateVec, u: float, which: CostKind) -> float:
    """Instantaneous cost rate: a1*i_h + (c/2)*u^2, plus a2*i_v for HOST_VECTOR."""
    return float(running_cost_fn(p, which)(x.as_array(), u))


def hamiltonian(p: ModelParams, x: StateVec, l: AdjointVec, u: float,
                which: CostKind) -> float:
    """Running cost plus the costate-weighted state derivatives."""
    d = state_rhs_fn(p)(0.0, x.as_array(), u)
    return running_cost(p, x, u, which) + float(np.dot(l.as_array(), d))


def adjoint_rhs(p: ModelParams, x: StateVec, l: AdjointVec, u: float,
                mode: AdjointMode, which: CostKind) -> AdjointVec:
    """Costate time derivatives in the selected mode (see AdjointMode)."""
    d = adjoint_rhs_fn(p, mode, which)(0.0, l.as_array(), x.as_array(), u)
    return AdjointVec.from_array(d)


def pointwise_optimal_control(p: ModelParams, x: StateVec, l: AdjointVec) -> float:
    """Hamiltonian-minimizing control: clamp(lam_h*s_h*(l2-l1)/c, 0, 1)."""
    n_h = x.s_h + x.i_h
    if n_h <= 0.0:
        raise NonpositivePopulation(f"total host population {n_h!r} <= 0")
    value = control_projection_fn(p)(x.as_array(), l.as_array())
    return float(value)
