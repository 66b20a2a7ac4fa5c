"""Interference from sub-THz terrestrial networks into passive satellite sensors."""

__version__ = "0.1.0"
