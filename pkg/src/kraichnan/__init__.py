"""Numerical laboratory for the Kraichnan passive scalar model on the torus."""

__version__ = "0.1.0"
