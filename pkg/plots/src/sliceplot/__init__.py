"""Figure rendering for slicesim CSV outputs."""

from .render import KINDS, FigureSpec, SchemaError, empirical_cdf, render

__version__ = "0.1.0"
