# coding: utf-8
"""Periodically forced heteroclinic network laboratory."""

__all__ = [
    "__version__"
]

__version__ = "0.1.0"
