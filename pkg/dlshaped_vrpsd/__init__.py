"""Exact DL-shaped branch-and-cut solver for the VRP with stochastic demands."""

__version__ = "0.1.0"
