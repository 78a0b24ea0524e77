"""Homomorphism spaces, their mixing hierarchy, and exact Gibbs computations."""

__version__ = "0.1.0"
