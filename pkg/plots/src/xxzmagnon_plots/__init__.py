"""Publication-style figures from xxzmagnon CSV files."""

__version__ = "0.1.0"

from .render import KINDS, render

__all__ = ["KINDS", "render", "__version__"]
