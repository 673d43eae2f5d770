"""Static figures from reldiff CSV outputs.

Pure CSV-to-image transformation: no physics is computed here, and the
simulation package runs fully without this component.
"""

from .figures import PlotSpec, read_figure1_csv, read_overlay_csv, render_figure1, render_overlay

__all__ = [
    "PlotSpec",
    "read_figure1_csv",
    "read_overlay_csv",
    "render_figure1",
    "render_overlay",
]
