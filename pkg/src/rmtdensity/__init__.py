"""Exact and asymptotic eigenvalue densities for Gaussian and Laguerre ensembles."""

__version__ = "0.1.0"
