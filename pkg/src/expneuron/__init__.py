"""Exponential-branch map-based neuron model: dynamics and bifurcation analysis."""

__version__ = "0.1.0"
