"""Clustering of categorical data with a Dirichlet process mixture of decomposable graphical models."""

__version__ = "0.1.0"
