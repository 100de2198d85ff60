"""Sketch-based edit distance: preprocessing, queries and exact oracles."""

__version__ = "0.1.0"
