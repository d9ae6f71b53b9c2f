"""Riemann-Liouville and Caputo fractional calculus with the FALVA variational layer."""
__version__ = "0.1.0"
