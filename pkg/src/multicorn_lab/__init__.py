"""Numerical workbench for unicritical (anti-)polynomials, real cubics and their parabolic germs."""

from .errors import DynamicsError

__version__ = "0.1.0"

__all__ = ["DynamicsError", "__version__"]
