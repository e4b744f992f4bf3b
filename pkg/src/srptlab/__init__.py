"""Simulation laboratory for SRPT heavy-traffic diffusion limits."""

__version__ = "0.1.0"
