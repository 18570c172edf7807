"""Numerical toolkit for the Timoshenko beam with Kelvin-Voigt damping."""

__version__ = "0.1.0"
