"""Figure rendering for the lending simulator's aggregation CSVs."""

from .render import FigureInputError, FigureSpec, rank_to_color, render

__all__ = ["FigureInputError", "FigureSpec", "rank_to_color", "render"]
