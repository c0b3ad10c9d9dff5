import numpy as np
import pytest

from tv_spectrum.core.grid import ScalarField
from tv_spectrum.data.phantoms import Disc, PhantomSpec, disc_phantom
from tv_spectrum.solvers.prox import SolverConfig


def centred_disc(size, radius, contrast=1.0, background=0.0):
    """Single disc in the middle of a size x size phantom"""
    center = (size - 1) / 2.0
    spec = PhantomSpec(size, size, background, (Disc(center, center, radius, contrast),))
    return disc_phantom(spec)


def distance_from_centre(size):
    """Distance of every pixel of a size x size grid from the centre used by centred_disc"""
    center = (size - 1) / 2.0
    rows, cols = np.mgrid[0:size, 0:size]
    return np.hypot(rows - center, cols - center)


def in_mask_energy_fraction(u, f):
    """<u, f> over the support of f, relative to <f, f>"""
    inside = f.values != 0
    return float((u.values[inside] * f.values[inside]).sum() / (f.values[inside] ** 2).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quick_solver():
    return SolverConfig.from_profile("test")


@pytest.fixture
def random_field(rng):
    return ScalarField(rng.random((9, 11)))


@pytest.fixture
def disc64():
    return centred_disc(64, 16.0)
