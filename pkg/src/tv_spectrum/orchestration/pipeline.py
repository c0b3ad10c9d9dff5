"""Decomposition pipeline and the disc and fidelity-comparison experiments."""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from ..analysis.bands import band_mask, cluster_bands, detect_peaks
from ..analysis.spectral import response_support, transform
from ..core.grid import ScalarField, estimate_operator_norm_sq, mean, median
from ..data.image_io import ensure_writable_dir
from ..data.oracles import cheeger_ratio, oracle_l1_disc, oracle_l2_disc
from ..data.outputs import save_decomposition, write_csv, write_outputs
from ..data.phantoms import Disc, PhantomSpec, disc_mask, disc_phantom
from ..solvers.prox import Fidelity
from ..solvers.scale_space import compute_scale_space, make_scale_grid

logger = logging.getLogger(__name__)

# A structure has vanished once its in-mask energy falls below this share
VANISHING_FRACTION = 0.01
# Minimum plateau height above the exterior for a stage to enter the slope fit
PLATEAU_FLOOR = 1e-3
# Oracle grids span [0.5, this factor times the expected vanishing scale]
ORACLE_SPAN_FACTOR = 1.5
COMPARE_FILE = "compare.csv"


def decompose(f, config):
    """
    Scale-space and spectral transform of an image

    Args:
        f: Input ScalarField
        config: RunConfig

    Returns:
        (ScaleSpace, SpectralDecomposition)
    """
    grid = config.scale_grid(f.width, f.height)
    norm_sq = estimate_operator_norm_sq(f.height, f.width, seed=config.seed)
    logger.info(
        f"tau*sigma = {config.solver.tau * config.solver.sigma:.4g}, "
        f"1/||grad||^2 ~ {1.0 / max(norm_sq, 1e-12):.4g}"
    )
    space = compute_scale_space(f, grid, config.fidelity, config.solver)
    return space, transform(space, f)


def select_bands(dec, config):
    """Cluster the clamped response into bands and compute one mask per band"""
    bands = cluster_bands(dec.clamped_response(), config.band_method, config.band_params)
    masks = [band_mask(dec, band, config.epsilon_seg) for band in bands]
    return bands, masks


def run_decompose(f, config, output_dir):
    """Full pipeline: decomposition, bands, artifacts and the saved decomposition"""
    _, dec = decompose(f, config)
    bands, masks = select_bands(dec, config)
    written = write_outputs(dec, bands, masks, config, f, output_dir)
    save_decomposition(dec, f, output_dir)
    return dec, bands, written


def _background_level(f, fidelity):
    return median(f) if fidelity is Fidelity.L1 else mean(f)


def measure_vanishing_stage(space, mask, f):
    """
    First stage at which the structure under ``mask`` has disappeared

    The in-mask energy <u_i - c, f - c>_mask, with c the limit of the
    scale-space (median for L1, mean for L2), is compared to <f - c, f - c>_mask.

    Returns:
        (index, t_alpha), or (None, None) when the structure survives every stage
    """
    inside = mask.values > 0.5
    if not inside.any():
        raise ValueError("Vanishing stage of an empty mask")
    level = _background_level(f, space.fidelity)
    centred = f.values[inside] - level
    reference = float((centred**2).sum())
    if reference <= 0:
        return 0, space.grid[0]
    for index, u in enumerate(space.solutions):
        energy = float(((u.values[inside] - level) * centred).sum())
        if energy < VANISHING_FRACTION * reference:
            return index, space.grid[index]
    return None, None


def _inner_disc(center, radius, width, height):
    rows, cols = np.mgrid[0:height, 0:width]
    return (cols - center[0]) ** 2 + (rows - center[1]) ** 2 <= (radius / 2.0) ** 2


def fit_plateau_slope(space, center, radius):
    """
    Least-squares slope of the plateau height of a disc versus t_alpha

    The plateau is the mean over the inner disc of half the radius; stages
    enter the fit while the plateau still stands above the exterior.

    Args:
        space: ScaleSpace of a disc phantom
        center: (center_x, center_y) of the disc
        radius: Disc radius

    Returns:
        Fitted slope
    """
    first = space.solutions[0]
    inner = _inner_disc(center, radius, first.width, first.height)
    outer = ~disc_mask(Disc(center[0], center[1], radius, 1.0), first.width, first.height)
    ts, heights = [], []
    for t, u in zip(space.grid, space.solutions):
        plateau = float(u.values[inner].mean())
        exterior = float(u.values[outer].mean()) if outer.any() else 0.0
        if plateau - exterior > PLATEAU_FLOOR:
            ts.append(t)
            heights.append(plateau)
    if len(ts) < 2:
        raise ValueError(f"Only {len(ts)} stage(s) with a standing plateau; cannot fit a slope")
    slope, _ = np.polyfit(ts, heights, 1)
    return float(slope)


class OracleReport(NamedTuple):
    fidelity: Fidelity
    radius: float
    contrast: float
    vanishing_index: Optional[int]
    vanishing_t: Optional[float]
    expected_vanishing_t: float
    slope: Optional[float]
    expected_slope: Optional[float]
    discrete_slope: Optional[float]
    plateau_error: float

    def lines(self):
        def fmt(value):
            return "n/a" if value is None else f"{value:.6g}"

        return [
            f"fidelity = {self.fidelity.value}",
            f"radius = {self.radius:g}",
            f"contrast = {self.contrast:g}",
            f"vanishing_index = {fmt(self.vanishing_index)}",
            f"vanishing_t_measured = {fmt(self.vanishing_t)}",
            f"vanishing_t_expected = {fmt(self.expected_vanishing_t)}",
            f"slope_measured = {fmt(self.slope)}",
            f"slope_expected = {fmt(self.expected_slope)}",
            f"slope_discrete = {fmt(self.discrete_slope)}",
            f"plateau_max_error = {fmt(self.plateau_error)}",
        ]


def disc_experiment_phantom(radius, contrast):
    """A single centred disc on a zero background, with a margin of one radius"""
    side = max(32, int(math.ceil(4 * radius)))
    center = (side - 1) / 2.0
    spec = PhantomSpec(side, side, 0.0, (Disc(center, center, radius, contrast),))
    return spec, disc_phantom(spec)


def oracle_check(r, c, fidelity, config, n_scales=None):
    """
    Run the single-disc experiment and compare with the closed-form solution

    L1: the disc keeps its height c until t = r/2 and then vanishes, whatever c
    is. L2: the plateau decays as c - 2t/r and vanishes at t = cr/2.

    Args:
        r: Disc radius in pixels
        c: Disc contrast
        fidelity: Fidelity.L1 or Fidelity.L2
        config: RunConfig (solver settings and number of scales)
        n_scales: Override of config.n_scales

    Returns:
        OracleReport
    """
    fidelity = Fidelity.parse(fidelity)
    if not c > 0:
        raise ValueError(f"Disc contrast must be positive: {c}")
    spec, f = disc_experiment_phantom(r, c)
    disc = spec.discs[0]
    expected_t = r / 2.0 if fidelity is Fidelity.L1 else c * r / 2.0
    grid = make_scale_grid(
        n_scales or config.n_scales, 0.5, ORACLE_SPAN_FACTOR * expected_t, "linear"
    )
    space = compute_scale_space(f, grid, fidelity, config.solver)

    mask = ScalarField(disc_mask(disc, spec.width, spec.height).astype(np.float64))
    index, t = measure_vanishing_stage(space, mask, f)

    inner = _inner_disc((disc.center_x, disc.center_y), r, spec.width, spec.height)
    errors = []
    for t_i, u in zip(space.grid, space.solutions):
        plateau = float(u.values[inner].mean())
        if fidelity is Fidelity.L2:
            errors.append(abs(plateau - oracle_l2_disc(c, r, t_i)))
        else:
            solution = oracle_l1_disc(c, r, t_i)
            if solution.unique:
                errors.append(abs(plateau - solution.height))

    slope = expected_slope = discrete_slope = None
    if fidelity is Fidelity.L2:
        slope = fit_plateau_slope(space, (disc.center_x, disc.center_y), r)
        expected_slope = -2.0 / r
        discrete_slope = -cheeger_ratio(mask)

    report = OracleReport(
        fidelity=fidelity,
        radius=float(r),
        contrast=float(c),
        vanishing_index=index,
        vanishing_t=t,
        expected_vanishing_t=expected_t,
        slope=slope,
        expected_slope=expected_slope,
        discrete_slope=discrete_slope,
        plateau_error=max(errors) if errors else 0.0,
    )
    logger.info(
        f"Disc r={r:g} c={c:g} ({fidelity.value}): vanished at stage {index} "
        f"(t={t}), expected t={expected_t:g}"
    )
    return report


def compare_fidelities(f, config, output_dir=None):
    """
    Decompose an image with both fidelities and tabulate their peaks

    Returns:
        DataFrame with one row per fidelity: peak count, peak indices, peak
        scales and the response support (entries above 10% of the maximum)
    """
    rows = []
    min_prominence = config.band_params.get("min_prominence", 0.1)
    for fidelity in (Fidelity.L1, Fidelity.L2):
        _, dec = decompose(f, config.with_overrides(fidelity=fidelity))
        response = dec.clamped_response()
        peaks = detect_peaks(response, min_prominence)
        rows.append(
            {
                "fidelity": fidelity.value,
                "n_peaks": len(peaks),
                "peak_indices": " ".join(str(i) for i in peaks),
                "peak_scales": " ".join(f"{dec.grid[i]:.6g}" for i in peaks),
                "support": response_support(response),
            }
        )
    table = pd.DataFrame(rows)
    if output_dir:
        out = ensure_writable_dir(output_dir)
        write_csv(table, out / COMPARE_FILE)
        logger.info(f"Wrote {out / COMPARE_FILE}")
    return table
