"""Betrayal prediction from Diplomacy game logs."""

__version__ = "0.1.0"
