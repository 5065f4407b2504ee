"""Figure rendering for xlmimo sweep aggregates."""
from .render import (AGGREGATE_COLUMNS, COLOR_CYCLE, PlotSpec, SchemaError,
                     build_curves, main, read_aggregate_csv, render_figures)

__version__ = "0.1.0"
