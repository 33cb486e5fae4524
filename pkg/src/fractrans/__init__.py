"""Pseudo-spectral simulator and numerical-verification suite for the 1D
transport equation with nonlocal velocity and fractional dissipation."""

__version__ = "0.1.0"

from .grid import Field, GridSpec

__all__ = ["Field", "GridSpec", "__version__"]
