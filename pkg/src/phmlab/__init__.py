"""Numerical verification of pseudo-harmonic morphisms and related structures."""

__version__ = "0.1.0"
