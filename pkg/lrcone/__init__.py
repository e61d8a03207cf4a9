"""Exact small-system verification of Lieb-Robinson bounds for power-law interactions."""

__version__ = "0.1.0"
