"""Spectral total-variation decomposition of images with L1 and L2 data fidelity"""

__version__ = "0.1.0"
__license__ = "CC BY-NC 4.0"

import logging

from .core.config import log_level_from_env

# Configure the root logger
logging.basicConfig(
    level=log_level_from_env(),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

# Import key components for easier access
from .core import ScalarField, VectorField, errors
from .solvers import Fidelity, SolverConfig, compute_scale_space, make_scale_grid, solve_denoise
from .analysis import FilterSpec, cluster_bands, reconstruct, segment, transform
from .data import disc_phantom, read_image, write_outputs
from .orchestration import RunConfig, decompose, run_cli
