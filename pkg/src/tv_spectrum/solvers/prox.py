"""First-order primal-dual solver for L1-TV and L2-TV (ROF) denoising.

Both models are solved in the form

    min_u  (1/alpha) * D(u - f) + TV(u),   D = ||.||_1  or  1/2 ||.||_2^2,

with the dual variable g constrained to the pointwise unit ball. Each iteration
is a dual ascent step with projection, a primal descent step through the
resolvent of the data term, and an extrapolation of the primal variable.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from ..core.errors import SolverDivergenceError
from ..core.grid import (
    EPS,
    ScalarField,
    VectorField,
    backward_divergence,
    forward_gradient,
    require_same_grid,
    tv_energy,
)
from ..core.presets import SOLVER_PROFILES

logger = logging.getLogger(__name__)

# Squared norm bound of the forward-difference gradient on any 2D grid
GRADIENT_NORM_SQ_BOUND = 8.0


class Fidelity(str, Enum):
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, value):
        """Accept a Fidelity or any casing of 'l1'/'l2'"""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown fidelity: {value} (expected l1 or l2)")


@dataclass(frozen=True)
class SolverConfig:
    """
    Primal-dual step parameters

    Args:
        tau: Primal step size
        sigma: Dual step size
        theta: Extrapolation weight in [0, 1]
        max_its: Iteration cap per solve
        rel_tol: Early-stop threshold on the relative primal and dual change
            (0 disables early stopping)
        check_every: Interval of the non-finite check
        record_every: Interval of the energy trace (0 disables it)
    """

    tau: float = 0.2
    sigma: float = 0.625
    theta: float = 1.0
    max_its: int = 50000
    rel_tol: float = 0.0
    check_every: int = 500
    record_every: int = 0

    def __post_init__(self):
        if not self.tau > 0 or not self.sigma > 0:
            raise ValueError(f"tau and sigma must be positive: {self.tau}, {self.sigma}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1]: {self.theta}")
        if self.max_its < 1:
            raise ValueError(f"max_its must be positive: {self.max_its}")
        if self.rel_tol < 0:
            raise ValueError(f"rel_tol must be nonnegative: {self.rel_tol}")
        if self.check_every < 1:
            raise ValueError(f"check_every must be positive: {self.check_every}")
        if self.record_every < 0:
            raise ValueError(f"record_every must be nonnegative: {self.record_every}")
        if self.tau * self.sigma * GRADIENT_NORM_SQ_BOUND > 1.0 + 1e-9:
            raise ValueError(
                f"Step sizes violate tau*sigma*8 <= 1: "
                f"{self.tau}*{self.sigma}*8 = {self.tau * self.sigma * 8:.6g}"
            )

    @classmethod
    def from_profile(cls, name, **overrides):
        """Build a config from a named profile in SOLVER_PROFILES"""
        if name not in SOLVER_PROFILES:
            raise ValueError(
                f"Unknown solver profile: {name} (available: {', '.join(SOLVER_PROFILES)})"
            )
        params = dict(SOLVER_PROFILES[name])
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**params)


@dataclass(frozen=True)
class EnergyReport:
    fidelity_term: float
    tv_term: float
    total: float
    iterations_used: int = 0
    converged: bool = False
    history: tuple = ()


class DenoiseResult(NamedTuple):
    u: ScalarField
    g: VectorField
    report: EnergyReport


def _project_unit_ball(gx, gy):
    scale = np.maximum(1.0, np.sqrt(gx**2 + gy**2))
    return gx / scale, gy / scale


def _shrink_toward(arg, f, threshold):
    """Soft shrinkage of arg toward f; the dead zone (ties included) maps to f."""
    diff = arg - f
    out = f.copy()
    above = diff > threshold
    below = diff < -threshold
    out[above] = arg[above] - threshold
    out[below] = arg[below] + threshold
    return out


def _weighted_average(arg, f, ratio):
    return (arg + ratio * f) / (1.0 + ratio)


def project_dual(g):
    """Project every dual vector onto the closed unit disc"""
    gx, gy = _project_unit_ball(g.x_comp, g.y_comp)
    return VectorField(gx, gy)


def prox_l1_data(arg, f, threshold):
    """
    Resolvent of u -> (1/alpha) ||u - f||_1 with threshold = tau / alpha

    Args:
        arg: Point at which the resolvent is evaluated
        f: Data field
        threshold: Positive shrinkage threshold

    Returns:
        arg - threshold where arg - f > threshold, arg + threshold where
        arg - f < -threshold, and f otherwise
    """
    require_same_grid(arg, f)
    if not threshold > 0:
        raise ValueError(f"threshold must be positive: {threshold}")
    return ScalarField(_shrink_toward(arg.values, f.values, threshold))


def prox_l2_data(arg, f, ratio):
    """Resolvent of u -> (1/alpha) 1/2 ||u - f||^2 with ratio = tau / alpha."""
    require_same_grid(arg, f)
    if not ratio > 0:
        raise ValueError(f"ratio must be positive: {ratio}")
    return ScalarField(_weighted_average(arg.values, f.values, ratio))


def _fidelity_value(residual, fidelity):
    if fidelity is Fidelity.L1:
        return float(np.abs(residual).sum())
    return float(0.5 * (residual**2).sum())


def energy(u, f, alpha, fidelity):
    """
    Denoising energy of u for data f

    L1: ||u - f||_1 + alpha TV(u); L2: 1/2 ||u - f||_2^2 + alpha TV(u).
    """
    require_same_grid(u, f)
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative: {alpha}")
    fidelity = Fidelity.parse(fidelity)
    fidelity_term = _fidelity_value(u.values - f.values, fidelity)
    tv_term = float(alpha) * tv_energy(u)
    return EnergyReport(
        fidelity_term=fidelity_term,
        tv_term=tv_term,
        total=fidelity_term + tv_term,
    )


def _array_energy(u, f, alpha, fidelity):
    gx, gy = forward_gradient(u)
    return _fidelity_value(u - f, fidelity) + alpha * float(np.sqrt(gx**2 + gy**2).sum())


def solve_denoise(f, alpha, fidelity, config, warm=None):
    """
    Solve the L1-TV or L2-TV denoising problem with the primal-dual iteration

    Args:
        f: Data field
        alpha: Positive regularization weight
        fidelity: Fidelity.L1 or Fidelity.L2 (strings accepted)
        config: SolverConfig
        warm: Optional (u, g) pair to start from; default u = 0, g = 0

    Returns:
        DenoiseResult(u, g, report) with the last iterate and its energy

    Raises:
        SolverDivergenceError: Non-finite values appeared during the iteration
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive: {alpha}")
    fidelity = Fidelity.parse(fidelity)
    data = f.values

    if warm is not None:
        warm_u, warm_g = warm
        require_same_grid(f, warm_u, warm_g)
        u = np.array(warm_u.values)
        gx = np.array(warm_g.x_comp)
        gy = np.array(warm_g.y_comp)
    else:
        u = np.zeros_like(data)
        gx = np.zeros_like(data)
        gy = np.zeros_like(data)

    tau, sigma, theta = config.tau, config.sigma, config.theta
    step = tau / alpha
    if fidelity is Fidelity.L1:
        data_step = _shrink_toward
    else:
        data_step = _weighted_average

    u_bar = u.copy()
    history = []
    converged = False
    iterations = 0

    for n in range(1, config.max_its + 1):
        dx, dy = forward_gradient(u_bar)
        gx_new, gy_new = _project_unit_ball(gx + sigma * dx, gy + sigma * dy)
        u_new = data_step(u + tau * backward_divergence(gx_new, gy_new), data, step)
        u_bar = u_new + theta * (u_new - u)

        if config.rel_tol > 0:
            primal_change = np.abs(u_new - u).sum() / max(np.abs(u).sum(), EPS)
            dual_change = (np.abs(gx_new - gx).sum() + np.abs(gy_new - gy).sum()) / max(
                np.abs(gx).sum() + np.abs(gy).sum(), EPS
            )
        u, gx, gy = u_new, gx_new, gy_new
        iterations = n

        if n % config.check_every == 0 and not (
            np.all(np.isfinite(u)) and np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))
        ):
            raise SolverDivergenceError(n)
        if config.record_every and n % config.record_every == 0:
            history.append(_array_energy(u, data, alpha, fidelity))
        if config.rel_tol > 0 and primal_change < config.rel_tol and dual_change < config.rel_tol:
            converged = True
            break

    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))):
        raise SolverDivergenceError(iterations)

    u_field = ScalarField(u)
    g_field = VectorField(gx, gy)
    report = energy(u_field, f, alpha, fidelity)
    report = EnergyReport(
        fidelity_term=report.fidelity_term,
        tv_term=report.tv_term,
        total=report.total,
        iterations_used=iterations,
        converged=converged,
        history=tuple(history),
    )
    logger.debug(
        f"{fidelity.value.upper()} solve alpha={alpha:.4g}: {iterations} iterations, "
        f"energy {report.total:.6g} (converged: {converged})"
    )
    return DenoiseResult(u_field, g_field, report)
