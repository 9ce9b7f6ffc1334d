"""Upcrossing inequalities for processes on groups of polynomial growth."""

__version__ = "0.1.0"
