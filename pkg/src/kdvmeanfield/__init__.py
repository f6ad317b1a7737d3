"""Soliton / mean-field interaction for the KdV equation with well-type data."""

__version__ = "0.1.0"
