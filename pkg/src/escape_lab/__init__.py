"""Numerical laboratory for escaping sets of small-growth entire functions."""
__version__ = "0.1.0"
