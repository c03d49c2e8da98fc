"""Generalized Dickman distributions: numerics, sampling, limit classification and simulation."""

__version__ = "0.1.0"
