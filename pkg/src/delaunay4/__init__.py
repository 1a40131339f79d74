"""Emden-Fowler solutions of the critical fourth-order Lane-Emden system."""

from .constants import DimensionParams, make_params

__all__ = ["DimensionParams", "make_params"]
__version__ = "0.1.0"
