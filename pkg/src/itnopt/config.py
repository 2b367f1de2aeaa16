"""Flat key = value scenario configuration.

A scenario file is plain text: one `key = value` per line, # comments and
blank lines ignored. Keys are the scalar model parameters, the four initial
compartment sizes (s_h0, i_h0, s_v0, i_v0), and the run controls (grid,
cost, adjoint mode, sweep list, output directory, seed). Every key is
optional; unset keys take the standard-scenario defaults. Values written by
write_config round-trip exactly through load_config.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InvariantViolation, ParseError, UnknownKey
from .integrators import TimeGrid
from .model import AdjointMode, CostKind, ItnMortalityPolicy, ModelParams, StateVec

_MODEL_FLOAT_KEYS = tuple(
    f.name for f in fields(ModelParams) if f.name != "itn_mortality_policy")
_STATE_KEYS = ("s_h0", "i_h0", "s_v0", "i_v0")

_ENUM_TOKENS = {
    "cost": {"j1": CostKind.HOST_ONLY, "j2": CostKind.HOST_VECTOR},
    "adjoint_mode": {"decoupled": AdjointMode.DECOUPLED, "exact": AdjointMode.EXACT},
    "itn_mortality_policy": {"product": ItnMortalityPolicy.PRODUCT,
                             "fixed_term": ItnMortalityPolicy.FIXED_TERM},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved run description; see module docstring for keys."""

    params: ModelParams = ModelParams()
    x0: StateVec = StateVec(800.0, 200.0, 4000.0, 900.0)
    t0: float = 0.0
    tf: float = 100.0
    n: int = 5000
    cost: CostKind = CostKind.HOST_ONLY
    adjoint_mode: AdjointMode = AdjointMode.DECOUPLED
    sweep_b: tuple[float, ...] | None = None
    control_enabled: bool = True
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        # grid bounds are validated by constructing the grid once
        TimeGrid(self.t0, self.tf, self.n)
        if self.sweep_b is not None:
            vals = tuple(float(v) for v in self.sweep_b)
            if not vals:
                raise InvariantViolation("sweep_b must be a nonempty list when set")
            for v in vals:
                if not (0.0 <= v <= 1.0):
                    raise InvariantViolation(f"sweep_b values must lie in [0, 1], got {v!r}")
            object.__setattr__(self, "sweep_b", vals)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t0, self.tf, self.n)


def _parse_value(key: str, raw: str):
    """Convert one raw token for `key`; ValueError on malformed input."""
    if key in _MODEL_FLOAT_KEYS or key in _STATE_KEYS or key in ("t0", "tf"):
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"expected a number for {key!r}, got {raw!r}") from None
    if key in ("n", "seed"):
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"expected an integer for {key!r}, got {raw!r}") from None
    if key == "control_enabled":
        token = raw.lower()
        if token in ("true", "false"):
            return token == "true"
        raise ValueError(f"expected true or false for {key!r}, got {raw!r}")
    if key in _ENUM_TOKENS:
        token = raw.lower()
        try:
            return _ENUM_TOKENS[key][token]
        except KeyError:
            options = "|".join(_ENUM_TOKENS[key])
            raise ValueError(f"expected one of {options} for {key!r}, got {raw!r}") from None
    if key == "sweep_b":
        parts = [s.strip() for s in raw.split(",")]
        if not all(parts):
            raise ValueError(f"expected comma-separated numbers for {key!r}, got {raw!r}")
        try:
            return tuple(float(s) for s in parts)
        except ValueError:
            raise ValueError(f"expected comma-separated numbers for {key!r}, got {raw!r}") from None
    if key == "output_dir":
        return raw
    raise UnknownKey(f"unknown configuration key {key!r}")


def _known_keys() -> tuple[str, ...]:
    return (_MODEL_FLOAT_KEYS + ("itn_mortality_policy",) + _STATE_KEYS
            + ("t0", "tf", "n", "cost", "adjoint_mode", "sweep_b",
               "control_enabled", "output_dir", "seed"))


def _parse_file(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError(f"line {lineno}, column {col}: expected key = value")
        value_col = line.index("=") + 2
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ParseError(f"line {lineno}, column 1: missing key before '='")
        if not raw:
            raise ParseError(f"line {lineno}, column {value_col}: missing value for {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except UnknownKey:
            raise UnknownKey(f"line {lineno}: unknown configuration key {key!r}") from None
        except ValueError as e:
            raise ParseError(f"line {lineno}, column {value_col}: {e}") from None
    return values


def _apply_overrides(values: dict[str, object], overrides: Mapping[str, str]) -> None:
    for key, raw in overrides.items():
        try:
            values[key] = _parse_value(key, str(raw))
        except ValueError as e:
            raise ParseError(f"override {key}={raw}: {e}") from None


def _build(values: Mapping[str, object]) -> ScenarioConfig:
    params_kwargs = {k: values[k] for k in _MODEL_FLOAT_KEYS if k in values}
    if "itn_mortality_policy" in values:
        params_kwargs["itn_mortality_policy"] = values["itn_mortality_policy"]
    params = ModelParams(**params_kwargs)
    defaults = ScenarioConfig()
    x0_parts = [values.get(k, getattr(defaults.x0, f))
                for k, f in zip(_STATE_KEYS, ("s_h", "i_h", "s_v", "i_v"))]
    cfg_kwargs = {k: values[k]
                  for k in ("t0", "tf", "n", "cost", "adjoint_mode", "sweep_b",
                            "control_enabled", "output_dir", "seed") if k in values}
    return ScenarioConfig(params=params, x0=StateVec(*map(float, x0_parts)), **cfg_kwargs)


def load_config(path: str | Path | None = None,
                overrides: Mapping[str, str] | None = None) -> ScenarioConfig:
    """Resolve a scenario from an optional file plus optional raw overrides.

    Precedence: built-in defaults, then file values, then overrides in
    mapping order. Raises ParseError for malformed text (with line and
    column for file input), UnknownKey for unrecognized keys, and
    InvariantViolation for well-formed but out-of-range values.
    """
    values: dict[str, object] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ParseError(f"config file not found: {path}") from None
        values.update(_parse_file(text))
    if overrides:
        _apply_overrides(values, overrides)
    return _build(values)


def as_flat_dict(cfg: ScenarioConfig) -> dict[str, str]:
    """Serialize every resolved setting to its config-file token form.

    sweep_b is omitted when unset; all other keys are always present, so the
    result materializes the defaults.
    """
    out: dict[str, str] = {}
    for k in _MODEL_FLOAT_KEYS:
        out[k] = repr(float(getattr(cfg.params, k)))
    out["itn_mortality_policy"] = cfg.params.itn_mortality_policy.value
    for k, f in zip(_STATE_KEYS, ("s_h", "i_h", "s_v", "i_v")):
        out[k] = repr(float(getattr(cfg.x0, f)))
    out["t0"] = repr(float(cfg.t0))
    out["tf"] = repr(float(cfg.tf))
    out["n"] = str(cfg.n)
    out["cost"] = cfg.cost.value
    out["adjoint_mode"] = cfg.adjoint_mode.value
    if cfg.sweep_b is not None:
        out["sweep_b"] = ",".join(repr(float(v)) for v in cfg.sweep_b)
    out["control_enabled"] = "true" if cfg.control_enabled else "false"
    out["output_dir"] = cfg.output_dir
    out["seed"] = str(cfg.seed)
    return out


def write_config(cfg: ScenarioConfig, path: str | Path) -> Path:
    """Write the fully resolved config; load_config reads it back identically."""
    path = Path(path)
    lines = [f"{k} = {v}" for k, v in as_flat_dict(cfg).items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
