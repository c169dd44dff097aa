"""Turn sweep CSV files into BLER-vs-SNR figures.

Each input file must follow the sweep CSV schema (comment lines starting
with '#' are provenance and get skipped):

    gamma_db,sigma2,trials,errors,bler,ci_low,ci_high,bound,floor,threshold_db

Per series the figure shows simulated points with 95% CI error bars, the
analytical upper bound as a line, the error floor as a dashed horizontal
line, and the SNR threshold as a dotted vertical line.  Zero-error rows
cannot sit on a log axis, so they are drawn as downward-arrow markers at
the CI upper bound — the standard convention — rather than dropped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

REQUIRED_COLUMNS = (
    "gamma_db", "sigma2", "trials", "errors", "bler", "ci_low", "ci_high",
    "bound", "floor", "threshold_db",
)


class SchemaError(ValueError):
    """An input file does not conform to the sweep CSV schema."""


@dataclass
class PlotSpec:
    """What to plot: input sweep CSVs, labels, output image, overlays."""

    inputs: list[str]
    labels: list[str] = field(default_factory=list)
    out: str = "bler.png"
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    show_floor: bool = True
    show_threshold: bool = True

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if not self.labels:
            self.labels = [Path(p).stem for p in self.inputs]
        if len(self.labels) != len(self.inputs):
            raise ValueError(
                f"got {len(self.labels)} labels for {len(self.inputs)} inputs"
            )
        suffix = Path(self.out).suffix.lower()
        if suffix not in (".png", ".svg"):
            raise ValueError(f"output must be .png or .svg, got {self.out!r}")


def read_sweep_csv(path: str) -> dict[str, np.ndarray]:
    """Load one sweep CSV into column arrays, validating the schema."""
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(
            line for line in fh if not line.startswith("#")
        ))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for column in REQUIRED_COLUMNS:
        if column not in rows[0] or any(r.get(column) in (None, "") for r in rows):
            raise SchemaError(f"{path}: missing column '{column}'")
    data = {
        column: np.array([float(r[column]) for r in rows])
        for column in REQUIRED_COLUMNS
    }
    return data


def build_figure(spec: PlotSpec):
    """Assemble the matplotlib figure; separated from render() for tests."""
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for path, label in zip(spec.inputs, spec.labels):
        data = read_sweep_csv(path)
        positive = data["errors"] > 0
        yerr = np.vstack([
            data["bler"][positive] - data["ci_low"][positive],
            data["ci_high"][positive] - data["bler"][positive],
        ])
        line = ax.errorbar(
            data["gamma_db"][positive], data["bler"][positive], yerr=yerr,
            marker="o", linestyle="none", capsize=3, label=f"{label} sim",
        )
        color = line.lines[0].get_color()
        zero = ~positive
        if np.any(zero):
            ax.plot(data["gamma_db"][zero], data["ci_high"][zero],
                    marker="v", linestyle="none", color=color,
                    label=f"{label} sim (0 errors, CI top)")
        ax.plot(data["gamma_db"], data["bound"], "-", color=color,
                label=f"{label} bound")
        if spec.show_floor and data["floor"][0] > 0:
            ax.axhline(data["floor"][0], linestyle="--", color=color,
                       linewidth=1, label=f"{label} floor")
        if spec.show_threshold:
            ax.axvline(data["threshold_db"][0], linestyle=":", color=color,
                       linewidth=1, label=f"{label} threshold")
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BLER")
    ax.grid(True, which="both", alpha=0.3)
    if spec.xlim is not None:
        ax.set_xlim(spec.xlim)
    if spec.ylim is not None:
        ax.set_ylim(spec.ylim)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, ax


def render(spec: PlotSpec) -> Path:
    """Render the figure to spec.out and return the written path."""
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, _ = build_figure(spec)
    out = Path(spec.out)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
