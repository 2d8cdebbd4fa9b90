"""rachplots: figure pipeline over the simulator's CSV/JSON result files."""

__version__ = "0.1.0"

from .figures import (FIGURE_KINDS, FigureSpec, SchemaError, build_figure,
                      load_spec_file, read_deployment, read_ecdf,
                      read_timeseries, render)

__all__ = ["FIGURE_KINDS", "FigureSpec", "SchemaError", "build_figure",
           "load_spec_file", "read_deployment", "read_ecdf",
           "read_timeseries", "render"]
