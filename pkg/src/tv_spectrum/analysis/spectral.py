"""Spectral transform, response, reconstruction and segmentation.

L1 mode: slices are first differences of the scale-space, phi_i = u_{i-1} - u_i
with u_{-1} = f, and the response is S^2_i = <phi_i, f>. Slices are increments,
so reconstructions sum them without quadrature weights; the constant term is
the median of f.

L2 mode: slices are t_i times the second scale derivative of u, computed with
three-point divided differences on the (possibly nonuniform) grid, and the
response is S_i = ||phi_i||_1. Reconstructions integrate with trapezoidal
weights; the constant term is the mean of f.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..core.errors import ForeignScaleSpaceError, SpectralModeError
from ..core.grid import (
    EPS,
    ScalarField,
    field_checksum,
    inner_product,
    l2_norm_sq,
    mean,
    median,
)
from ..solvers.prox import Fidelity
from ..solvers.scale_space import ScaleGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Spectral slices of a scale-space

    ``response_sq`` holds S^2 = <phi, f> in L1 mode and S = ||phi||_1 in L2
    mode; ``mode`` tells which.
    """

    grid: ScaleGrid
    phi: tuple
    response_sq: np.ndarray
    mode: Fidelity
    c_hat: float
    tail: ScalarField

    def __post_init__(self):
        if len(self.phi) != len(self.grid):
            raise ValueError(f"{len(self.phi)} slices for a grid of {len(self.grid)} scales")
        response = np.array(self.response_sq, dtype=np.float64).ravel()
        if response.size != len(self.grid):
            raise ValueError("response length must equal the grid length")
        if not np.all(np.isfinite(response)):
            raise ValueError("response contains non-finite values")
        if self.mode is Fidelity.L2 and np.any(response < 0):
            raise ValueError("L2 response entries must be nonnegative")
        response.setflags(write=False)
        object.__setattr__(self, "response_sq", response)

    def __len__(self):
        return len(self.grid)

    def phi_stack(self):
        """Slices as an array of shape (n_scales, height, width)"""
        return np.stack([p.values for p in self.phi])

    def clamped_response(self):
        return np.maximum(self.response_sq, 0.0)


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Filter weights H(t_i) per scale index plus the weight H(inf)"""

    weights: np.ndarray
    weight_inf: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        if not np.all(np.isfinite(w)) or not np.isfinite(self.weight_inf):
            raise ValueError("Filter weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "weight_inf", float(self.weight_inf))

    def __len__(self):
        return self.weights.size

    @classmethod
    def all_pass(cls, n):
        return cls(np.ones(n), 1.0)

    @classmethod
    def band_pass(cls, n, start, end, weight_inf=0.0):
        """Indicator of the inclusive index interval [start, end]"""
        if not 0 <= start <= end < n:
            raise ValueError(f"Invalid band [{start}, {end}] for {n} scales")
        w = np.zeros(n)
        w[start : end + 1] = 1.0
        return cls(w, weight_inf)


def _require_source(space, f):
    if field_checksum(f) != space.source_checksum:
        raise ForeignScaleSpaceError(
            "Scale-space was not computed from the supplied data"
        )


def transform_l1(space, f):
    """
    First-difference spectral transform of an L1 scale-space

    Args:
        space: ScaleSpace computed with the L1 fidelity from f
        f: The data the scale-space was computed from

    Returns:
        SpectralDecomposition in L1 mode; response values are stored raw and
        may be slightly negative
    """
    if space.fidelity is not Fidelity.L1:
        raise SpectralModeError(f"Expected an L1 scale-space, got {space.fidelity.value}")
    _require_source(space, f)
    previous = f
    phi = []
    for u in space.solutions:
        phi.append(previous - u)
        previous = u
    response = np.array([inner_product(p, f) for p in phi])
    return SpectralDecomposition(
        grid=space.grid,
        phi=tuple(phi),
        response_sq=response,
        mode=Fidelity.L1,
        c_hat=median(f),
        tail=space.solutions[-1],
    )


def _second_difference_weights(t, i0):
    """Divided-difference weights of u'' over the points t[i0], t[i0+1], t[i0+2]."""
    a, b, c = t[i0], t[i0 + 1], t[i0 + 2]
    return (
        2.0 / ((b - a) * (c - a)),
        -2.0 / ((b - a) * (c - b)),
        2.0 / ((c - b) * (c - a)),
    )


def transform_l2(space, f):
    """
    Second-derivative spectral transform of an L2 scale-space

    Interior slices use the centred three-point stencil; the two endpoints reuse
    the stencil of their nearest interior neighbour.
    """
    if space.fidelity is not Fidelity.L2:
        raise SpectralModeError(f"Expected an L2 scale-space, got {space.fidelity.value}")
    _require_source(space, f)
    n = len(space.grid)
    if n < 3:
        raise ValueError(f"The L2 transform needs at least 3 scales, got {n}")
    t = space.grid.t_values
    u = space.stack()
    phi = []
    for i in range(n):
        i0 = min(max(i - 1, 0), n - 3)
        w0, w1, w2 = _second_difference_weights(t, i0)
        u_tt = w0 * u[i0] + w1 * u[i0 + 1] + w2 * u[i0 + 2]
        phi.append(ScalarField(t[i] * u_tt))
    response = np.array([float(np.abs(p.values).sum()) for p in phi])
    return SpectralDecomposition(
        grid=space.grid,
        phi=tuple(phi),
        response_sq=response,
        mode=Fidelity.L2,
        c_hat=mean(f),
        tail=space.solutions[-1],
    )


def transform(space, f):
    """Spectral transform matching the fidelity of the scale-space"""
    if space.fidelity is Fidelity.L1:
        return transform_l1(space, f)
    return transform_l2(space, f)


def trapezoid_weights(t):
    """Trapezoidal quadrature weights for samples at t"""
    t = np.asarray(t, dtype=np.float64)
    dt = np.zeros_like(t)
    dt[0] = (t[1] - t[0]) / 2.0
    dt[-1] = (t[-1] - t[-2]) / 2.0
    dt[1:-1] = (t[2:] - t[:-2]) / 2.0
    return dt


def _weighted_slices(dec, weights):
    if len(weights) != len(dec):
        raise ValueError(f"Filter has {len(weights)} weights for {len(dec)} scales")
    coeffs = np.asarray(weights, dtype=np.float64)
    if dec.mode is Fidelity.L2:
        coeffs = coeffs * trapezoid_weights(dec.grid.t_values)
    total = np.zeros(dec.tail.shape)
    for coeff, p in zip(coeffs, dec.phi):
        total += coeff * p.values
    return total


def reconstruct(dec, filter_spec):
    """
    Filtered reconstruction f_H = sum_i H_i phi_i (dt_i) + H(inf) c_hat

    Args:
        dec: SpectralDecomposition
        filter_spec: FilterSpec with one weight per scale

    Returns:
        ScalarField of the filtered image
    """
    total = _weighted_slices(dec, filter_spec.weights)
    return ScalarField(total + filter_spec.weight_inf * dec.c_hat)


def segment(dec, filter_spec, epsilon=1e-3):
    """Binary mask of pixels where the filtered slice sum exceeds epsilon; H(inf) is ignored."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative: {epsilon}")
    total = _weighted_slices(dec, filter_spec.weights)
    return ScalarField((total > epsilon).astype(np.float64))


def parseval_residual(dec, f):
    """
    Relative defect of the Parseval analogue |sum S^2 - ||f||^2| / ||f||^2

    Returns 0 for f = 0.
    """
    if dec.mode is not Fidelity.L1:
        raise SpectralModeError("The Parseval residual is defined for L1 decompositions")
    norm_sq = l2_norm_sq(f)
    if norm_sq < EPS:
        return 0.0
    return abs(float(dec.response_sq.sum()) - norm_sq) / norm_sq


def response_support(response, fraction=0.1):
    """Number of response entries above fraction * max(response)"""
    response = np.asarray(response, dtype=np.float64)
    peak = response.max() if response.size else 0.0
    if peak <= 0:
        return 0
    return int(np.count_nonzero(response > fraction * peak))
