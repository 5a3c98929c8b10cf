"""Complementable operators: block forms, Douglas solutions, Schur complements and limit experiments."""

__version__ = "0.1.0"
