"""Numerical laboratory for the Calabi flow on Kähler curves."""

__version__ = "0.1.0"
