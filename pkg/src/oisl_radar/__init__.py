"""Simulator of a photonic dual-chirp radar driven by period-one laser dynamics."""

__version__ = "0.1.0"
