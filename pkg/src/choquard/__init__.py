"""Numerical verification toolkit for Choquard equations in exterior domains."""

__version__ = "0.1.0"
