import numpy as np
import pytest

from tv_spectrum.core.errors import SolverDivergenceError
from tv_spectrum.core.grid import ScalarField, VectorField, tv_energy
from tv_spectrum.data.oracles import brute_force_l1tv
from tv_spectrum.solvers.prox import (
    Fidelity,
    SolverConfig,
    energy,
    project_dual,
    prox_l1_data,
    prox_l2_data,
    solve_denoise,
)
from conftest import centred_disc, distance_from_centre, in_mask_energy_fraction


def pixel(value):
    return ScalarField(np.array([[float(value)]]))


@pytest.mark.parametrize(
    "vector, expected",
    [((0.6, 0.8), (0.6, 0.8)), ((3.0, 4.0), (0.6, 0.8)), ((0.0, 0.0), (0.0, 0.0))],
)
def test_project_dual(vector, expected):
    g = project_dual(VectorField(np.array([[vector[0]]]), np.array([[vector[1]]])))
    assert g.x_comp[0, 0] == pytest.approx(expected[0])
    assert g.y_comp[0, 0] == pytest.approx(expected[1])


@pytest.mark.parametrize("arg, expected", [(2.0, 1.5), (0.8, 1.0), (0.2, 0.7)])
def test_prox_l1_data_branches(arg, expected):
    out = prox_l1_data(pixel(arg), pixel(1.0), 0.5)
    assert out.values[0, 0] == pytest.approx(expected)


def test_prox_l1_data_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        prox_l1_data(pixel(1.0), pixel(1.0), 0.0)


def test_prox_l2_data():
    f = ScalarField.from_flat(3, 1, [0.1, 0.5, 0.9])
    assert np.allclose(prox_l2_data(f, f, 0.3).values, f.values)
    assert prox_l2_data(pixel(1.5), pixel(0.0), 0.5).values[0, 0] == pytest.approx(1.0)
    assert prox_l2_data(pixel(1.5), pixel(0.0), 1e-12).values[0, 0] == pytest.approx(1.5, abs=1e-9)


def test_step_sizes_must_satisfy_bound():
    with pytest.raises(ValueError):
        SolverConfig(tau=0.5, sigma=0.625)
    SolverConfig(tau=0.2, sigma=0.625)


def test_profiles():
    paper = SolverConfig.from_profile("paper")
    assert (paper.tau, paper.sigma, paper.theta, paper.max_its) == (0.2, 0.625, 1.0, 50000)
    assert paper.rel_tol == 0.0
    test = SolverConfig.from_profile("test", max_its=100, rel_tol=None)
    assert test.max_its == 100 and test.rel_tol == 1e-8
    with pytest.raises(ValueError):
        SolverConfig.from_profile("fast")


def test_fidelity_parse():
    assert Fidelity.parse("L2") is Fidelity.L2
    assert Fidelity.parse(Fidelity.L1) is Fidelity.L1
    with pytest.raises(ValueError):
        Fidelity.parse("l3")


def test_energy_at_data():
    f = centred_disc(24, 5.0)
    report = energy(f, f, 2.0, Fidelity.L1)
    assert report.fidelity_term == 0.0
    assert report.tv_term == pytest.approx(2.0 * tv_energy(f))


def test_energy_of_zero_is_disc_area():
    f = centred_disc(24, 5.0)
    report = energy(ScalarField.zeros(24, 24), f, 0.0, "l1")
    assert report.total == f.values.sum()


def test_energy_l2_is_half_squared_distance():
    f = ScalarField.from_flat(2, 1, [1.0, 3.0])
    report = energy(ScalarField.zeros(2, 1), f, 0.0, Fidelity.L2)
    assert report.total == pytest.approx(5.0)


def test_disc_energy_crossover_near_half_radius():
    f = centred_disc(64, 16.0)
    zero = ScalarField.zeros(64, 64)
    crossover = f.values.sum() / tv_energy(f)
    assert crossover == pytest.approx(8.0, rel=0.15)
    below, above = 0.9 * crossover, 1.1 * crossover
    assert energy(f, f, below, "l1").total < energy(zero, f, below, "l1").total
    assert energy(f, f, above, "l1").total > energy(zero, f, above, "l1").total


@pytest.mark.parametrize("fidelity", [Fidelity.L1, Fidelity.L2])
def test_constant_data_is_a_fixed_point(fidelity):
    f = ScalarField.constant(6, 5, 0.7)
    u, g, report = solve_denoise(f, 1.0, fidelity, SolverConfig(max_its=2000))
    assert np.allclose(u.values, 0.7, rtol=0, atol=1e-12)
    assert report.total == pytest.approx(0.0, abs=1e-10)


def test_alpha_must_be_positive():
    f = ScalarField.zeros(2, 2)
    with pytest.raises(ValueError):
        solve_denoise(f, 0.0, Fidelity.L1, SolverConfig())


def test_warm_start_must_match_grid():
    f = ScalarField.zeros(3, 3)
    with pytest.raises(ValueError):
        solve_denoise(f, 1.0, Fidelity.L1, SolverConfig(), warm=(f, VectorField.zeros(2, 3)))


def test_l1_keeps_disc_below_half_radius(disc64):
    u, _, report = solve_denoise(
        disc64, 4.0, Fidelity.L1, SolverConfig(max_its=5000), warm=(disc64, VectorField.zeros(64, 64))
    )
    # the rasterized rim is not a discrete minimizer, so only the rim moves
    distance = distance_from_centre(64)
    assert np.max(np.abs(u.values[distance <= 12.0] - 1.0)) <= 0.02
    assert np.max(np.abs(u.values[distance >= 20.0])) <= 0.02
    assert in_mask_energy_fraction(u, disc64) >= 0.95
    assert energy(u, disc64, 4.0, Fidelity.L1).total <= energy(disc64, disc64, 4.0, Fidelity.L1).total
    assert report.iterations_used == 5000


def test_early_stop_reports_convergence():
    f = ScalarField.constant(4, 4, 0.3)
    _, _, report = solve_denoise(f, 1.0, Fidelity.L1, SolverConfig.from_profile("test"))
    assert report.converged
    assert report.iterations_used < 100


def test_energy_trace_is_nonincreasing(disc64):
    config = SolverConfig(max_its=2000, record_every=100)
    _, _, report = solve_denoise(disc64, 3.0, Fidelity.L2, config)
    assert len(report.history) == 20
    # every sample lies past the first 1% of the iterations
    for earlier, later in zip(report.history[:-1], report.history[1:]):
        assert later <= earlier * (1.0 + 1e-6)


@pytest.mark.parametrize("fidelity", [Fidelity.L1, Fidelity.L2])
def test_dual_stays_in_unit_ball(random_field, fidelity):
    _, g, _ = solve_denoise(random_field, 0.4, fidelity, SolverConfig(max_its=300))
    assert np.max(np.hypot(g.x_comp, g.y_comp)) <= 1.0 + 1e-12


@pytest.mark.parametrize("fidelity", [Fidelity.L1, Fidelity.L2])
def test_grey_level_shift_commutes_with_solve(random_field, fidelity):
    config = SolverConfig(max_its=300)
    zeros = VectorField.zeros(random_field.width, random_field.height)
    shifted = ScalarField(random_field.values + 0.75)
    u, _, _ = solve_denoise(random_field, 0.4, fidelity, config, warm=(random_field, zeros))
    v, _, _ = solve_denoise(shifted, 0.4, fidelity, config, warm=(shifted, zeros))
    assert np.max(np.abs(v.values - (u.values + 0.75))) <= 1e-9


def test_l1_solution_scales_with_contrast(quick_solver):
    f = centred_disc(32, 6.0)
    dim = centred_disc(32, 6.0, contrast=0.25)
    zeros = VectorField.zeros(32, 32)
    u, _, _ = solve_denoise(f, 1.5, Fidelity.L1, quick_solver, warm=(f, zeros))
    v, _, _ = solve_denoise(dim, 1.5, Fidelity.L1, quick_solver, warm=(dim, zeros))
    full = energy(u, f, 1.5, Fidelity.L1).total
    assert energy(v, dim, 1.5, Fidelity.L1).total == pytest.approx(0.25 * full, rel=1e-3)
    # away from the rim the minimizer is unique
    distance = distance_from_centre(32)
    away = (distance <= 3.0) | (distance >= 9.0)
    assert np.max(np.abs(v.values[away] - 0.25 * u.values[away])) <= 1e-3


def test_divergence_is_reported():
    f = ScalarField(np.array([[1e308, -1e308]]))
    config = SolverConfig(max_its=10, check_every=1)
    with np.errstate(all="ignore"), pytest.raises(SolverDivergenceError) as excinfo:
        solve_denoise(f, 1.0, Fidelity.L2, config, warm=(f, VectorField.zeros(2, 1)))
    assert excinfo.value.iteration == 1
    assert excinfo.value.stage is None


def _check_against_oracle(seed, alpha):
    rng = np.random.default_rng(seed)
    f = ScalarField(rng.integers(0, 2, size=(4, 4)).astype(np.float64))
    bound, _ = brute_force_l1tv(f, alpha)
    u, _, report = solve_denoise(f, alpha, Fidelity.L1, SolverConfig(max_its=5000))
    assert report.total <= bound + 1e-3


@pytest.mark.parametrize("seed", range(3))
def test_l1_solver_reaches_binary_minimum(seed):
    _check_against_oracle(seed, 0.3)


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.6])
@pytest.mark.parametrize("seed", range(20))
def test_l1_solver_reaches_binary_minimum_sweep(seed, alpha):
    _check_against_oracle(seed, alpha)
