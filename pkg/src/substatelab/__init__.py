"""Numerical laboratory for classical and quantum substate decompositions."""

__version__ = "0.1.0"
