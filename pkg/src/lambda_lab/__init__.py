"""Exact computations with the Legendre-lambda modular polynomial F_p(X, Y)."""

__version__ = "0.1.0"
