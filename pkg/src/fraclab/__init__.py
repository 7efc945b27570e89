"""Numerical laboratory for fractional Schrodinger blow-up on radial model manifolds."""

__version__ = "0.1.0"
