"""Operator-valued free probability over B = C^d."""

__version__ = "0.1.0"
