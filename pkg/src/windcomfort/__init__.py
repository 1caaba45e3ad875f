"""Surrogate wind-flow prediction and pedestrian comfort mapping."""

__version__ = "0.1.0"
