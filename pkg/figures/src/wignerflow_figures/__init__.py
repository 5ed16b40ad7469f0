"""Figure rendering for wignerflow phase-space artifacts."""

__version__ = "0.1.0"

from .io import (MissingInputError, read_contours, read_fieldlines,
                 read_grid_csv, read_stagnation)
from .render import FigureSpec, render, render_panel_A, render_panel_B

__all__ = [
    "__version__",
    "MissingInputError",
    "read_contours", "read_fieldlines", "read_grid_csv", "read_stagnation",
    "FigureSpec", "render", "render_panel_A", "render_panel_B",
]
