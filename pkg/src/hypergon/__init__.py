"""Polygons in hyperbolic 3-space: Gauss maps, bending flows and Poisson brackets."""

__version__ = "0.1.0"

SCHEMA = "hypergon/1"
