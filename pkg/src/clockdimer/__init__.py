"""Pulse-level simulation of a two-qubit clock-transition nanomagnet dimer."""

__version__ = "0.1.0"
