"""Symmetry-resolved simulation of all-to-all interacting three-level atoms."""

__version__ = "0.1.0"
