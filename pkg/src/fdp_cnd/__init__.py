"""Canonical noise distributions for f-differential privacy."""

__version__ = "0.1.0"
