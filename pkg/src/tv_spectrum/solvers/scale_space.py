"""Forward variational scale-space: denoising with increasing regularization.

Stage i solves the denoising problem at t_i warm-started from the solution and
dual variable of stage i-1; stage 0 starts from (f, 0) so that u(t -> 0) = f.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..core.errors import SolverDivergenceError
from ..core.grid import VectorField, field_checksum
from ..core.presets import DEFAULT_T_MAX_FACTOR, DEFAULT_T_MIN
from .prox import Fidelity, solve_denoise

logger = logging.getLogger(__name__)

SPACINGS = ("linear", "logarithmic", "explicit")


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    t_values: np.ndarray
    spacing_tag: str = "explicit"

    def __post_init__(self):
        t = np.array(self.t_values, dtype=np.float64).ravel()
        if t.size < 2:
            raise ValueError(f"A scale grid needs at least 2 values, got {t.size}")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise ValueError("Scale values must be finite and positive")
        if np.any(np.diff(t) <= 0):
            raise ValueError("Scale values must be strictly increasing")
        if self.spacing_tag not in SPACINGS:
            raise ValueError(f"Unknown spacing: {self.spacing_tag}")
        t.setflags(write=False)
        object.__setattr__(self, "t_values", t)

    def __len__(self):
        return self.t_values.size

    def __getitem__(self, index):
        return float(self.t_values[index])

    def __iter__(self):
        return (float(t) for t in self.t_values)

    def step_containing(self, t):
        """Largest spacing between consecutive grid values around t"""
        steps = np.diff(self.t_values)
        idx = int(np.clip(np.searchsorted(self.t_values, t) - 1, 0, steps.size - 1))
        return float(steps[idx])


@dataclass(frozen=True, eq=False)
class ScaleSpace:
    grid: ScaleGrid
    solutions: tuple
    fidelity: Fidelity
    source_checksum: str
    reports: tuple

    def __post_init__(self):
        if len(self.solutions) != len(self.grid):
            raise ValueError(
                f"{len(self.solutions)} solutions for a grid of {len(self.grid)} scales"
            )
        if len(self.reports) != len(self.grid):
            raise ValueError(
                f"{len(self.reports)} reports for a grid of {len(self.grid)} scales"
            )

    def __len__(self):
        return len(self.grid)

    def stack(self):
        """Solutions as an array of shape (n_scales, height, width)"""
        return np.stack([u.values for u in self.solutions])


def make_scale_grid(n, t_min, t_max, spacing="linear"):
    """
    Build n scale values from t_min to t_max

    Args:
        n: Number of scales (at least 2)
        t_min: Smallest scale, positive
        t_max: Largest scale, greater than t_min
        spacing: "linear" (equal increments) or "logarithmic" (equal ratios)

    Returns:
        ScaleGrid whose first and last values are exactly t_min and t_max
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if not t_min > 0:
        raise ValueError(f"t_min must be positive, got {t_min}")
    if not t_min < t_max:
        raise ValueError(f"t_min must be smaller than t_max: {t_min} >= {t_max}")
    if spacing == "linear":
        values = np.linspace(t_min, t_max, n)
    elif spacing == "logarithmic":
        values = np.geomspace(t_min, t_max, n)
    else:
        raise ValueError(f"Unknown spacing: {spacing} (expected linear or logarithmic)")
    values[0], values[-1] = t_min, t_max
    return ScaleGrid(values, spacing)


def explicit_scale_grid(values):
    return ScaleGrid(values, "explicit")


def default_scale_grid(width, height, n=20, spacing="linear"):
    """Grid spanning [0.5, 1.25 * max(width, height) / 4]."""
    t_max = DEFAULT_T_MAX_FACTOR * max(width, height) / 4.0
    return make_scale_grid(n, DEFAULT_T_MIN, t_max, spacing)


def compute_scale_space(f, grid, fidelity, config):
    """
    Solve the denoising problem for every scale of the grid, in order

    Args:
        f: Data field
        grid: ScaleGrid of regularization strengths
        fidelity: Fidelity.L1 or Fidelity.L2
        config: SolverConfig used for every stage

    Returns:
        ScaleSpace with one solution and energy report per scale

    Raises:
        SolverDivergenceError: tagged with the failing stage index
    """
    fidelity = Fidelity.parse(fidelity)
    logger.info(
        f"Computing {fidelity.value.upper()} scale-space on {f.width}x{f.height} "
        f"over {len(grid)} scales [{grid[0]:.4g}, {grid[-1]:.4g}]"
    )
    warm = (f, VectorField.zeros(f.width, f.height))
    solutions = []
    reports = []
    for stage, t in enumerate(grid):
        try:
            u, g, report = solve_denoise(f, t, fidelity, config, warm=warm)
        except SolverDivergenceError as e:
            logger.error(f"Divergence at stage {stage} (t_alpha={t:.4g})")
            raise e.at_stage(stage) from e
        logger.info(
            f"  stage {stage:3d}  t_alpha={t:9.4f}  its={report.iterations_used:6d}  "
            f"energy={report.total:.6g}"
        )
        solutions.append(u)
        reports.append(report)
        warm = (u, g)
    return ScaleSpace(
        grid=grid,
        solutions=tuple(solutions),
        fidelity=fidelity,
        source_checksum=field_checksum(f),
        reports=tuple(reports),
    )
