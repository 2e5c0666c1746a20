"""Figure rendering for staghunt experiment report CSVs."""

from staghunt_plots.render import PlotSpec, SchemaError, render

__all__ = ["PlotSpec", "SchemaError", "render"]
