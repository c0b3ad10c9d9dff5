"""Phantoms, oracles, image codecs and run outputs for the tv-spectrum package."""

# Export important functions
from .image_io import read_image, write_pgm, write_ppm
from .phantoms import disc_phantom, phantom_preset
from .oracles import brute_force_l1tv, oracle_l1_disc, oracle_l2_disc
from .outputs import load_decomposition, save_decomposition, write_outputs
