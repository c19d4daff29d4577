"""Metric-graph potential theory: spectra, heat kernels, Green functions and Brownian motion.

Numerical companions to Green-function estimates on hyperbolic metric graphs,
built on finite-difference discretisations of Kirchhoff Laplacians.
"""
from .errors import GraphPotentialError, PreconditionError
from .graph import GraphPoint, GraphSpec, MetricGraph, build_graph

__version__ = "0.1.0"

__all__ = ["GraphPoint", "GraphPotentialError", "GraphSpec", "MetricGraph", "PreconditionError", "build_graph"]
