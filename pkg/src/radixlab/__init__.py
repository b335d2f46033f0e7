"""Simulation laboratory for the precision of floating-point number systems."""

__version__ = "0.1.0"
