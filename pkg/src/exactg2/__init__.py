"""Exact computations for Lie-algebra cohomology, derivations and G2-structures."""

__version__ = "0.1.0"
