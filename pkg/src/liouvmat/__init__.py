"""Exact arithmetic and brute-force Diophantine tooling for Liouville matrices."""

__version__ = "0.1.0"
