"""Closed-form disc solutions, discrete Cheeger ratios and an exhaustive L1-TV oracle."""

import logging
import math
from typing import NamedTuple

import numpy as np

from ..core.errors import InstanceTooLargeError
from ..core.grid import ScalarField, tv_energy
from ..solvers.prox import Fidelity, energy

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_PIXELS = 20
# candidates evaluated per vectorized batch
BATCH_SIZE = 1 << 14
TIE_TOLERANCE = 1e-9


class L1DiscSolution(NamedTuple):
    """Plateau height of the L1-TV solution for a disc; NaN when not unique"""

    height: float
    unique: bool
    interval: tuple


def oracle_l2_disc(c, r, t):
    """Plateau height (c - 2t/r) of the L2-TV solution for c * 1_{B_r}, or 0 once t >= cr/2"""
    if not r > 0:
        raise ValueError(f"radius must be positive: {r}")
    if t < c * r / 2.0:
        return c - (2.0 / r) * t
    return 0.0


def oracle_l1_disc(c, r, t):
    """
    Plateau height of the L1-TV solution for c * 1_{B_r}

    Returns:
        L1DiscSolution: (c, True) below r/2, (0, True) above it, and at t = r/2
        a NaN height with the admissible interval between 0 and c
    """
    if not r > 0:
        raise ValueError(f"radius must be positive: {r}")
    critical = r / 2.0
    if t < critical:
        return L1DiscSolution(float(c), True, (float(c), float(c)))
    if t > critical:
        return L1DiscSolution(0.0, True, (0.0, 0.0))
    return L1DiscSolution(math.nan, False, (min(0.0, c), max(0.0, c)))


def _require_binary(mask, name):
    values = mask.values
    if not np.all((values == 0.0) | (values == 1.0)):
        raise ValueError(f"{name} must be binary (values 0 and 1 only)")


def cheeger_ratio(mask):
    """Discrete perimeter (TV of the indicator) over area (pixel count)"""
    _require_binary(mask, "mask")
    area = float(mask.values.sum())
    if area == 0:
        raise ValueError("cheeger_ratio of an empty mask")
    return tv_energy(mask) / area


def _candidate_batch(start, stop, n):
    """Binary candidates start..stop-1; pixel 0 is the most significant bit"""
    k = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((k[:, None] >> shifts[None, :]) & 1).astype(np.float64)


def _batch_energies(cand, f, alpha):
    m = cand.shape[0]
    h, w = f.shape
    u = cand.reshape(m, h, w)
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :, :-1] = u[:, :, 1:] - u[:, :, :-1]
    gy[:, :-1, :] = u[:, 1:, :] - u[:, :-1, :]
    tv = np.sqrt(gx**2 + gy**2).reshape(m, -1).sum(axis=1)
    return np.abs(cand - f.values.ravel()[None, :]).sum(axis=1) + alpha * tv


def brute_force_l1tv(f, alpha):
    """
    Exhaustive minimum of ||u - f||_1 + alpha TV(u) over binary u

    Candidates are enumerated in lexicographic order of their row-major pixel
    tuples; energies within TIE_TOLERANCE of the minimum count as ties, and
    ties resolve to the lexicographically first minimizer whatever the batching.

    Args:
        f: Binary ScalarField with at most 20 pixels
        alpha: Nonnegative regularization weight

    Returns:
        (min_energy, minimizer)
    """
    _require_binary(f, "f")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative: {alpha}")
    n = f.width * f.height
    if n > MAX_BRUTE_FORCE_PIXELS:
        raise InstanceTooLargeError(
            f"Exhaustive search over {n} pixels exceeds the limit of {MAX_BRUTE_FORCE_PIXELS}"
        )

    total = 1 << n
    energies = np.concatenate(
        [
            _batch_energies(_candidate_batch(start, min(start + BATCH_SIZE, total), n), f, alpha)
            for start in range(0, total, BATCH_SIZE)
        ]
    )
    # first candidate within the tie tolerance of the minimum
    best_index = int(np.flatnonzero(energies <= energies.min() + TIE_TOLERANCE)[0])

    minimizer = ScalarField(_candidate_batch(best_index, best_index + 1, n).reshape(f.shape))
    report = energy(minimizer, f, alpha, Fidelity.L1)
    logger.debug(
        f"Brute force over {total} candidates, alpha={alpha}: energy {report.total:.6g}"
    )
    return report.total, minimizer
