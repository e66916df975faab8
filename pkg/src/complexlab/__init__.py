"""Numerical laboratory for extension operators on complex hypersurfaces."""

__version__ = "0.1.0"
