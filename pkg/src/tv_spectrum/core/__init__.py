"""Core grid types, operators, errors and named presets for the tv-spectrum package."""

# Export important classes and functions
from . import errors
from .grid import ScalarField, VectorField, divergence, gradient, tv_energy
from .presets import PHANTOM_PRESETS, SOLVER_PROFILES
