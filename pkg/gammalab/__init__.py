"""Numerical laboratory for non-local energies and their Gamma-limit constants."""

__version__ = "0.1.0"
