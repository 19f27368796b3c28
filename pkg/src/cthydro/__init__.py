"""Continuous-time hydrothermal scheduling as a solver-agnostic MILP."""

__version__ = "0.1.0"
