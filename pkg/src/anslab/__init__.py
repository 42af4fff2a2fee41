"""Anisotropic Navier-Stokes lifespan laboratory on the periodic box."""
from .dynamics import ViscosityTriple
from .fields import ConfigurationError, Grid3, SpectralField3, VectorField3

__all__ = ["ConfigurationError", "Grid3", "SpectralField3", "VectorField3", "ViscosityTriple"]
