"""Trace-method toolkit for Weil-Petersson volume functions, hyperbolic
length formulas, Friedman-Ramanujan function classes and random regular graphs."""

__version__ = "0.1.0"
