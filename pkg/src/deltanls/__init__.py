"""Distorted Fourier analysis for the delta-potential Schroedinger operator and modified scattering for cubic NLS."""
__version__ = "0.1.0"
