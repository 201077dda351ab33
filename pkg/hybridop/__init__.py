"""Hybridop - genuine hybrid Baskakov-Szász operators, moments and verification harness."""

__version__ = "0.1.0"
