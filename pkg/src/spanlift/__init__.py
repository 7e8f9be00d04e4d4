"""Span-lifting verifier and privacy accountant."""

__version__ = "0.1.0"
