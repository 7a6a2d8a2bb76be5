"""Exact computations with intrinsic hyperplane arrangements of hook Specht modules."""

__version__ = "0.1.0"
