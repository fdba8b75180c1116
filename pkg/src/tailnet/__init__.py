"""Extremal-dependence networks and minimum-risk portfolio selection."""

__version__ = "0.1.0"
