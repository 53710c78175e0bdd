"""Numerical curvature laboratory: Kähler positivity notions and Weil-Petersson curvature."""

__version__ = "0.1.0"
