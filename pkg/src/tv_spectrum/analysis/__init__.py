"""Spectral transform and band analysis modules for the tv-spectrum package."""

# Export important classes and functions
from .spectral import FilterSpec, SpectralDecomposition, reconstruct, segment, transform
from .bands import Band, cluster_bands, colorize_bands, detect_peaks
