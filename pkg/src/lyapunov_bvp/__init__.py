"""Lyapunov constants, stability certificates and numerical oracles."""

__version__ = "0.1.0"
