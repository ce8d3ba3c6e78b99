"""Neuroevolution of physics-based 2D walkers with a crowd-rated gallery."""

__version__ = "0.1.0"
