"""Field types and discrete differential operators on a 2D pixel grid.

Fields are stored as read-only ``float64`` arrays of shape ``(height, width)``
in row-major order and indexed ``(row, col)``. The gradient uses forward
differences with a Neumann (replicate) boundary, the divergence is its exact
negative adjoint, and the total variation is the isotropic sum of pointwise
gradient magnitudes.
"""

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleFieldsError

logger = logging.getLogger(__name__)

# Guard for relative quantities whose denominator may vanish
EPS = 1e-12


def _frozen_array(values, name):
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive width and height")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real-valued image on a ``height x width`` grid"""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, "ScalarField"))

    @classmethod
    def from_flat(cls, width, height, values):
        """Build a field from a row-major flat sequence of ``width*height`` values"""
        flat = np.asarray(values, dtype=np.float64).ravel()
        if flat.size != width * height:
            raise ValueError(
                f"Expected {width * height} values for a {width}x{height} grid, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @classmethod
    def constant(cls, width, height, value):
        return cls(np.full((height, width), float(value)))

    @classmethod
    def zeros(cls, width, height):
        return cls.constant(width, height, 0.0)

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def flat(self):
        """Row-major copy of the values"""
        return self.values.ravel().copy()

    def same_grid(self, other):
        return self.shape == other.shape

    def __add__(self, other):
        if isinstance(other, ScalarField):
            require_same_grid(self, other)
            return ScalarField(self.values + other.values)
        return ScalarField(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            require_same_grid(self, other)
            return ScalarField(self.values - other.values)
        return ScalarField(self.values - float(other))

    def __mul__(self, scale):
        return ScalarField(self.values * float(scale))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(-self.values)

    def __repr__(self):
        return f"ScalarField({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class VectorField:
    """A 2-vector per pixel: ``x_comp`` along columns, ``y_comp`` along rows"""

    x_comp: np.ndarray
    y_comp: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x_comp, "VectorField.x_comp")
        y = _frozen_array(self.y_comp, "VectorField.y_comp")
        if x.shape != y.shape:
            raise ValueError(
                f"VectorField components differ in shape: {x.shape} vs {y.shape}"
            )
        object.__setattr__(self, "x_comp", x)
        object.__setattr__(self, "y_comp", y)

    @classmethod
    def zeros(cls, width, height):
        return cls(np.zeros((height, width)), np.zeros((height, width)))

    @property
    def width(self):
        return self.x_comp.shape[1]

    @property
    def height(self):
        return self.x_comp.shape[0]

    @property
    def shape(self):
        return self.x_comp.shape

    def magnitude(self):
        """Pointwise Euclidean norm as a plain array"""
        return np.sqrt(self.x_comp**2 + self.y_comp**2)

    def __repr__(self):
        return f"VectorField({self.width}x{self.height})"


def require_same_grid(*fields):
    """Raise IncompatibleFieldsError unless all fields share one grid"""
    shapes = {field.shape for field in fields}
    if len(shapes) > 1:
        raise IncompatibleFieldsError(
            f"Fields live on different grids: {sorted(shapes)}"
        )


# Array kernels. The solver loops call these directly to avoid re-validating
# and copying fields on every iteration.


def forward_gradient(u):
    """Forward differences of a 2D array, zero in the last column/row."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return gx, gy


def backward_divergence(gx, gy):
    """Negative adjoint of forward_gradient."""
    div = np.zeros_like(gx)
    div[:, :-1] += gx[:, :-1]
    div[:, 1:] -= gx[:, :-1]
    div[:-1, :] += gy[:-1, :]
    div[1:, :] -= gy[:-1, :]
    return div


def gradient(u):
    """
    Discrete gradient with forward differences and Neumann boundary

    Args:
        u: ScalarField

    Returns:
        VectorField with x_comp(i, j) = u(i, j+1) - u(i, j) for j < width-1 (else 0)
        and y_comp(i, j) = u(i+1, j) - u(i, j) for i < height-1 (else 0)
    """
    gx, gy = forward_gradient(u.values)
    return VectorField(gx, gy)


def divergence(g):
    """
    Discrete divergence, the exact negative adjoint of :func:`gradient`

    Args:
        g: VectorField

    Returns:
        ScalarField satisfying <grad u, g> + <u, div g> = 0 for every u
    """
    return ScalarField(backward_divergence(g.x_comp, g.y_comp))


def tv_energy(u):
    """Isotropic total variation: sum over pixels of |grad u|."""
    gx, gy = forward_gradient(u.values)
    return float(np.sqrt(gx**2 + gy**2).sum())


def l1_norm(u):
    return float(np.abs(u.values).sum())


def l2_norm_sq(u):
    return float((u.values**2).sum())


def inner_product(u, v):
    """Euclidean inner product of two fields (scalar or vector) on one grid"""
    require_same_grid(u, v)
    if isinstance(u, VectorField) and isinstance(v, VectorField):
        return float((u.x_comp * v.x_comp).sum() + (u.y_comp * v.y_comp).sum())
    return float((u.values * v.values).sum())


def mean(u):
    return float(u.values.mean())


def median(u):
    """
    Median of the pixel values

    For an even pixel count the lower midpoint order statistic is returned, so
    the result is always a value the image attains.
    """
    flat = u.values.ravel()
    k = (flat.size - 1) // 2
    return float(np.partition(flat, k)[k])


def field_checksum(u):
    """SHA-256 over the grid shape and the raw values"""
    digest = hashlib.sha256()
    digest.update(f"{u.height}x{u.width}".encode("utf-8"))
    digest.update(np.ascontiguousarray(u.values).tobytes())
    return digest.hexdigest()


def estimate_operator_norm_sq(height, width, n_iter=200, seed=0):
    """
    Estimate ||grad||^2 with the power method on -div(grad(.))

    Args:
        height: Grid height in pixels
        width: Grid width in pixels
        n_iter: Number of power iterations
        seed: Seed for the random start vector

    Returns:
        Rayleigh-quotient estimate of the largest eigenvalue of -div(grad)
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((height, width))
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(n_iter):
        y = -backward_divergence(*forward_gradient(x))
        norm = np.linalg.norm(y)
        if norm < EPS:
            return 0.0
        estimate = float((x * y).sum())
        x = y / norm
    logger.debug(f"Operator norm estimate on {width}x{height}: {estimate:.6f}")
    return estimate
