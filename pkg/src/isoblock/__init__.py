"""Brouwer degree, isolating blocks and Euler characteristics for flows on R^n."""

__version__ = "0.1.0"
