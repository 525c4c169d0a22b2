"""Finite pure and linear automata over prime fields: products, decomposition into atoms, divisor checks."""

__version__ = "0.1.0"
