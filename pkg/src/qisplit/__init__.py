"""Simulation and verification of quantum information splitting protocols."""

__version__ = "0.1.0"
