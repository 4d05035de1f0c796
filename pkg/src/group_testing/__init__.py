"""Biblioteca de group testing não adaptativo com matrizes Bernoulli."""

__version__ = "0.1.0"
