"""Dissipative preparation of Bell and GHZ states with engineered pump maps."""

__version__ = "0.1.0"
