"""Cyclic configuration spaces of spheres and periodic billiard trajectories."""

__version__ = "0.1.0"
