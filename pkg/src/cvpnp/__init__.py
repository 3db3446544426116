"""Simulation and analysis of a go-&-return continuous-variable QKD link."""

__version__ = "0.1.0"
