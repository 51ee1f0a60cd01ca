"""Publication-style figures from the engine simulator's CSV outputs.

This package reads the documented CSV contract (summary.csv,
populations.csv, work_hist.csv, dispersion.csv) and renders four figure
kinds; it deliberately contains no simulation logic and does not import
the simulator package.
"""

from .figures import FIGURE_KINDS, FigureSpec, PlotDataError, build_figure, render

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "FigureSpec", "PlotDataError", "build_figure", "render", "__version__"]
