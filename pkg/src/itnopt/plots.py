"""Static SVG line plots rendered from trajectory CSV artifacts.

Plots are derived artifacts: every curve is read back from a CSV written by
the scenario runner, never taken from in-memory solver state, so a plot can
always be regenerated from the persisted data alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .errors import InvariantViolation, MissingArtifact, ParseError

CSV_COLUMNS = ("t", "S_h", "I_h", "S_v", "I_v", "u",
               "lambda1", "lambda2", "lambda3", "lambda4")

# kind -> (csv columns drawn, y-axis label)
_KINDS = {
    "states": (("S_h", "I_h", "S_v", "I_v"), "individuals"),
    "hosts": (("S_h", "I_h"), "humans"),
    "vectors": (("S_v", "I_v"), "mosquitoes"),
    "susceptible-humans": (("S_h",), "humans"),
    "infectious-humans": (("I_h",), "humans"),
    "control": (("u",), "control u (dimensionless)"),
}


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: one figure per kind, named <scenario>_<kind>.svg.

    labels name the input CSVs in order and are required whenever more than
    one CSV is overlaid.
    """

    scenario: str
    kinds: tuple[str, ...]
    out_dir: str | Path
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.kinds:
            raise InvariantViolation("PlotSpec needs at least one figure kind")
        for kind in self.kinds:
            if kind not in _KINDS:
                raise InvariantViolation(
                    f"unknown figure kind {kind!r}; known: {', '.join(sorted(_KINDS))}")


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Load one trajectory CSV into column arrays keyed by header name."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"missing CSV artifact: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ParseError(f"{path}: expected header {','.join(CSV_COLUMNS)}")
    body = rows[1:]
    if not body:
        raise MissingArtifact(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in body])
    except ValueError:
        raise ParseError(f"{path}: non-numeric cell in data rows") from None
    if data.shape[1] != len(CSV_COLUMNS):
        raise ParseError(f"{path}: ragged row; expected {len(CSV_COLUMNS)} cells")
    return {name: data[:, k] for k, name in enumerate(CSV_COLUMNS)}


def render_plots(csv_paths, spec: PlotSpec) -> list[Path]:
    """Draw every requested figure from the given CSVs; return SVG paths."""
    paths = [Path(p) for p in csv_paths]
    if not paths:
        raise MissingArtifact("no CSV artifacts given")
    if len(paths) > 1:
        if spec.labels is None or len(spec.labels) != len(paths):
            raise InvariantViolation("overlay plots need one label per CSV")
    data = [read_trajectory_csv(p) for p in paths]
    labels = spec.labels if spec.labels is not None else (None,) * len(paths)

    out_dir = Path(spec.out_dir)
    written: list[Path] = []
    for kind in spec.kinds:
        columns, ylabel = _KINDS[kind]
        fig = Figure(figsize=(7.0, 4.5))
        ax = fig.subplots()
        for cols, label in zip(data, labels):
            for name in columns:
                if label is None:
                    curve_label = name
                elif len(columns) == 1:
                    curve_label = label
                else:
                    curve_label = f"{name}, {label}"
                ax.plot(cols["t"], cols[name], label=curve_label, linewidth=1.2)
        ax.set_xlabel("time (days)")
        ax.set_ylabel(ylabel)
        if kind == "control":
            ax.set_ylim(-0.05, 1.05)
        if len(data) > 1 or len(columns) > 1:
            ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        out = out_dir / f"{spec.scenario}_{kind}.svg"
        fig.savefig(out, format="svg")
        written.append(out)
    return written
