"""Plotting companion for spinal-codes sweep CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, build_figure, read_sweep_csv, render

__all__ = ["PlotSpec", "SchemaError", "build_figure", "read_sweep_csv", "render"]
