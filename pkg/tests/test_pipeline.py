import numpy as np
import pytest

from tv_spectrum.analysis.bands import (
    band_energy_fraction,
    band_reconstructions,
    cluster_bands,
    colorize_bands,
    detect_peaks,
)
from tv_spectrum.analysis.spectral import FilterSpec, parseval_residual, reconstruct, segment, transform
from tv_spectrum.core.config import RunConfig
from tv_spectrum.core.grid import ScalarField, field_checksum, inner_product
from tv_spectrum.core.presets import PALETTE
from tv_spectrum.data.phantoms import disc_mask, disc_phantom, phantom_preset
from tv_spectrum.orchestration.pipeline import (
    compare_fidelities,
    decompose,
    fit_plateau_slope,
    measure_vanishing_stage,
    oracle_check,
)
from tv_spectrum.solvers.prox import Fidelity
from tv_spectrum.solvers.scale_space import ScaleSpace, compute_scale_space, make_scale_grid


def synthetic_space(f, heights, t_values, fidelity):
    """Scale-space whose solutions are f scaled by the given heights"""
    return ScaleSpace(
        grid=make_scale_grid(len(t_values), t_values[0], t_values[-1]),
        solutions=tuple(ScalarField(f.values * h) for h in heights),
        fidelity=fidelity,
        source_checksum=field_checksum(f),
        reports=(None,) * len(t_values),
    )


def test_vanishing_stage_of_synthetic_space(disc64):
    space = synthetic_space(disc64, [1.0, 1.0, 0.5, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0, 5.0], Fidelity.L1)
    mask = ScalarField((disc64.values > 0).astype(float))
    assert measure_vanishing_stage(space, mask, disc64) == (3, 4.0)


def test_surviving_structure_has_no_vanishing_stage(disc64):
    space = synthetic_space(disc64, [1.0, 1.0, 1.0], [1.0, 2.0, 3.0], Fidelity.L1)
    mask = ScalarField((disc64.values > 0).astype(float))
    assert measure_vanishing_stage(space, mask, disc64) == (None, None)
    with pytest.raises(ValueError):
        measure_vanishing_stage(space, ScalarField.zeros(64, 64), disc64)


def test_plateau_slope_of_synthetic_space(disc64):
    t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
    heights = [max(0.0, 1.0 - ti / 8.0) for ti in t]
    space = synthetic_space(disc64, heights, t, Fidelity.L2)
    assert fit_plateau_slope(space, (31.5, 31.5), 16.0) == pytest.approx(-0.125)


def test_plateau_slope_needs_two_stages(disc64):
    space = synthetic_space(disc64, [1.0, 0.0, 0.0], [1.0, 2.0, 3.0], Fidelity.L2)
    with pytest.raises(ValueError):
        fit_plateau_slope(space, (31.5, 31.5), 16.0)


def test_decompose_constant_image():
    f = ScalarField.constant(12, 10, 0.5)
    config = RunConfig.load(None, {"profile": "test", "n_scales": 4})
    space, dec = decompose(f, config)
    assert len(space) == 4
    assert np.all(dec.response_sq == 0.0)
    assert cluster_bands(dec.clamped_response(), "peaks") == []


@pytest.fixture(scope="module")
def four_disc_run():
    spec = phantom_preset("four-disc-sizes")
    f = disc_phantom(spec)
    config = RunConfig.load(None, {"profile": "test", "t_min": 0.75, "t_max": 10.25})
    space, dec = decompose(f, config)
    return spec, f, space, dec


def region(disc, spec):
    return ScalarField(disc_mask(disc, spec.width, spec.height).astype(np.float64))


@pytest.mark.slow
def test_four_disc_sizes_give_four_peaks(four_disc_run):
    _, _, _, dec = four_disc_run
    response = dec.clamped_response()
    peaks = detect_peaks(response)
    assert len(peaks) == 4
    bands = cluster_bands(response, "peaks")
    assert len(bands) == 4
    for band, peak in zip(bands, peaks):
        assert band.contains(peak)


@pytest.mark.slow
def test_four_disc_bands_hold_one_disc_each(four_disc_run):
    spec, f, _, dec = four_disc_run
    bands = cluster_bands(dec.clamped_response(), "peaks")
    # peaks come in order of scale, so band k belongs to the k-th smallest disc
    discs = sorted(spec.discs, key=lambda d: d.radius)
    for band, recon in zip(bands, band_reconstructions(dec, bands)):
        for k, disc in enumerate(discs):
            share = band_energy_fraction(recon, region(disc, spec), f)
            if k == band.label:
                assert share >= 0.95
            else:
                assert share <= 0.05


@pytest.mark.slow
def test_four_disc_spectrum_keeps_the_energy(four_disc_run):
    _, f, space, dec = four_disc_run
    assert parseval_residual(dec, f) <= 0.05
    captured = inner_product(f - space.solutions[-1], f)
    assert dec.response_sq.sum() == pytest.approx(captured, rel=1e-10)
    restored = reconstruct(dec, FilterSpec.all_pass(len(dec)))
    assert np.max(np.abs(restored.values - f.values)) <= 0.02


@pytest.mark.slow
def test_small_disc_band_separates_by_size():
    spec = phantom_preset("two-disc-mixed")
    f = disc_phantom(spec)
    small, large = spec.discs
    config = RunConfig.load(None, {"profile": "test", "n_scales": 25, "t_min": 0.75, "t_max": 12.75})
    _, dec = decompose(f, config)
    response = dec.clamped_response()

    peaks = detect_peaks(response)
    assert len(peaks) >= 2
    for peak, disc in zip((peaks[0], peaks[-1]), (small, large)):
        assert dec.grid[peak] == pytest.approx(disc.radius / 2.0, rel=0.30)

    first = cluster_bands(response, "peaks")[0]
    out = reconstruct(dec, first.filter_spec(len(dec)))
    assert band_energy_fraction(out, region(small, spec), f) >= 0.95
    assert band_energy_fraction(out, region(large, spec), f) <= 0.05


@pytest.mark.slow
def test_equal_size_discs_share_a_band_regardless_of_contrast():
    spec = phantom_preset("contrast-pair")
    f = disc_phantom(spec)
    config = RunConfig.load(None, {"profile": "test", "n_scales": 12, "t_min": 0.75, "t_max": 11.75})
    _, dec = decompose(f, config)
    response = dec.clamped_response()
    peak = int(np.argmax(response))
    band = next(b for b in cluster_bands(response, "peaks") if b.contains(peak))
    mask = segment(dec, band.filter_spec(len(dec)))
    for disc in spec.discs:
        region = disc_mask(disc, spec.width, spec.height)
        assert mask.values[region].mean() >= 0.95


@pytest.mark.slow
def test_background_intensity_disc_is_never_segmented(quick_solver):
    values = np.full((48, 48), 0.5)
    rows, cols = np.mgrid[0:48, 0:48]
    hidden = (rows - 14) ** 2 + (cols - 14) ** 2 <= 36
    visible = (rows - 34) ** 2 + (cols - 34) ** 2 <= 36
    values[visible] = 1.0
    f = ScalarField(values)
    space = compute_scale_space(f, make_scale_grid(8, 0.75, 7.75), Fidelity.L1, quick_solver)
    dec = transform(space, f)
    for band in cluster_bands(dec.clamped_response(), "peaks"):
        assert not segment(dec, band.filter_spec(len(dec))).values[hidden].any()


@pytest.mark.slow
def test_nested_discs_are_coloured_by_scale():
    spec = phantom_preset("nested-discs")
    f = disc_phantom(spec)
    config = RunConfig.load(None, {"profile": "test", "n_scales": 25, "t_min": 0.75, "t_max": 12.75})
    _, dec = decompose(f, config)
    bands = cluster_bands(dec.clamped_response(), "peaks")
    assert len(bands) == 2
    rgb = colorize_bands(dec, bands, f)
    assert np.allclose(rgb[48, 48], PALETTE[0], atol=1e-6)
    assert np.allclose(rgb[48, 48 + 14], np.array(PALETTE[1]) * 0.3, atol=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("radius", [12.0, 16.0, 24.0])
def test_oracle_check_l2_slope(radius):
    config = RunConfig.load(None, {"profile": "test"})
    report = oracle_check(radius, 1.0, "l2", config)
    assert report.expected_slope == -2.0 / radius
    # the plateau falls at the perimeter-to-area ratio of the rasterized disc
    assert report.slope == pytest.approx(report.discrete_slope, rel=0.10)
    assert report.slope == pytest.approx(report.expected_slope, rel=0.25)


@pytest.mark.slow
def test_oracle_check_l1_is_contrast_invariant():
    config = RunConfig.load(None, {"profile": "test"})
    low = oracle_check(16.0, 0.25, "l1", config)
    high = oracle_check(16.0, 0.9, "l1", config)
    assert low.vanishing_index is not None
    assert low.vanishing_index == high.vanishing_index
    assert low.vanishing_t == pytest.approx(8.0, rel=0.25)


@pytest.mark.slow
def test_l2_spectrum_is_less_sparse_than_l1(tmp_path):
    f = disc_phantom(phantom_preset("nested-discs"))
    config = RunConfig.load(None, {"profile": "test", "n_scales": 25, "t_min": 0.75, "t_max": 12.75})
    table = compare_fidelities(f, config, tmp_path)
    rows = table.set_index("fidelity")
    assert rows.loc["l1", "n_peaks"] == 2
    assert rows.loc["l2", "support"] >= rows.loc["l1", "support"]
    assert (tmp_path / "compare.csv").exists()
