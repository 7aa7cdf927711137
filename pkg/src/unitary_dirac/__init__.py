"""Numerical toolkit for a time-inversion symmetric Dirac equation with scalar Coulomb coupling."""

__version__ = "0.1.0"
