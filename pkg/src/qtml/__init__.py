"""Numerical harness for first moments of quadratic twists of level-one Hecke eigenforms."""

__version__ = "0.1.0"
