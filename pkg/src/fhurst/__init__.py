"""Hurst exponent estimation for long-range dependent curve time series."""

__version__ = "0.1.0"
