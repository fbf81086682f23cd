"""Figures from memspike output files (trace CSV, metrics JSON).

This package reads only the documented file formats; it shares no code
with the simulator.
"""

__version__ = "0.1.0"

from .render import FigureSpec, RenderError, render

__all__ = ["__version__", "FigureSpec", "RenderError", "render"]
