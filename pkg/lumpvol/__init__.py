"""Numerical laboratory for L2 and vortex volumes of rational-map moduli spaces."""

__version__ = "0.1.0"

__all__ = ["__version__"]
