"""Primal-dual denoising solvers and the forward scale-space."""

# Export important classes and functions
from .prox import Fidelity, SolverConfig, energy, solve_denoise
from .scale_space import ScaleGrid, ScaleSpace, compute_scale_space, make_scale_grid
