"""Fractal graphs, random walks, and lamplighter mixing experiments."""

__version__ = "0.1.0"
