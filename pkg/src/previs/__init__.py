"""Reduced-order field interpolation and regression-error impact mapping."""

__version__ = "0.1.0"
