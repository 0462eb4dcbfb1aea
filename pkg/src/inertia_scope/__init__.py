"""Synthetic PMU workbench for center-of-inertia based inertia estimation."""

__version__ = "0.1.0"
