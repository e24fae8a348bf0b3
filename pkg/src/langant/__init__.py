"""Generalised Langton's ants: engine, highways, constructions, census."""

__version__ = "0.1.0"
