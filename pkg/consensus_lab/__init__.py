"""Consensus laboratory for dynamic directed networks."""

__version__ = "0.3.0"
