"""Interval analysis and vulnerability detection for a Solidity subset."""

__version__ = "0.1.0"
