"""Numerical laboratory for the copolymer at a selective interface."""

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "fracmom",
    "metrics",
    "model",
    "partition",
    "phase",
    "renewal",
    "settings",
    "stats",
]
