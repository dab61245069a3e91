"""Numerical toolkit for optical power-and-data links with a photovoltaic receiver."""

__version__ = "0.1.0"
