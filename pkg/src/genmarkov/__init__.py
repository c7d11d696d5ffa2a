"""Markovian and memory-kernel open quantum dynamics."""

__version__ = "0.1.0"
