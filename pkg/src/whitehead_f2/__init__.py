"""Mod 2 homology calculus for the Goodwillie tower of S^1 and the Whitehead sequence."""

__version__ = "0.1.0"
