"""Numerical laboratory for the disc multiplier in mixed-norm spaces."""

__version__ = "0.1.0"
