"""Run artifacts: response table, band images, composite, masks and decomposition files.

Everything written here is a pure function of the decomposition and the run
configuration, so two identical runs produce byte-identical directories.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..analysis.bands import band_reconstructions, colorize_bands
from ..analysis.spectral import SpectralDecomposition
from ..core.grid import ScalarField
from ..solvers.prox import Fidelity
from ..solvers.scale_space import ScaleGrid
from .image_io import ensure_writable_dir, write_pgm, write_ppm

logger = logging.getLogger(__name__)

RESPONSE_FILE = "response.csv"
RUN_CONFIG_FILE = "run_config.txt"
COMPOSITE_FILE = "composite.ppm"
DECOMPOSITION_META = "decomposition.txt"
FLOAT_FORMAT = "%.12g"


def response_table(dec):
    """Response per scale as a DataFrame with the column layout of response.csv"""
    table = pd.DataFrame(
        {
            "index": np.arange(len(dec)),
            "t_alpha": dec.grid.t_values,
        }
    )
    if dec.mode is Fidelity.L1:
        table["S_sq_raw"] = dec.response_sq
        table["S_sq_clamped"] = dec.clamped_response()
    else:
        table["S"] = dec.response_sq
    return table


def write_csv(table, path):
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_outputs(dec, bands, masks, config, f, output_dir):
    """
    Write the artifacts of a run

    Args:
        dec: SpectralDecomposition
        bands: List of Band (may be empty)
        masks: One binary ScalarField per band, or None to skip mask files
        config: RunConfig echoed to run_config.txt
        f: Input image, used to shade the composite
        output_dir: Target directory, created if missing

    Returns:
        List of written paths
    """
    out = ensure_writable_dir(output_dir)
    written = []

    path = out / RESPONSE_FILE
    write_csv(response_table(dec), path)
    written.append(path)

    if bands:
        for band, recon in zip(bands, band_reconstructions(dec, bands)):
            path = out / f"band_{band.label}.pgm"
            write_pgm(recon, path, maxval=255)
            written.append(path)
        path = out / COMPOSITE_FILE
        write_ppm(colorize_bands(dec, bands, f, config.epsilon_seg), path)
        written.append(path)
        if masks is not None:
            written.extend(write_masks(bands, masks, out))

    path = out / RUN_CONFIG_FILE
    path.write_text("\n".join(config.to_lines()) + "\n", encoding="utf-8")
    written.append(path)

    logger.info(f"Wrote {len(written)} file(s) to {out}")
    return written


def write_masks(bands, masks, output_dir):
    """Write one binary mask_<label>.pgm per band"""
    if len(masks) != len(bands):
        raise ValueError(f"{len(masks)} masks for {len(bands)} bands")
    out = ensure_writable_dir(output_dir)
    written = []
    for band, mask in zip(bands, masks):
        path = out / f"mask_{band.label}.pgm"
        write_pgm(mask, path, maxval=255)
        written.append(path)
    return written


def save_decomposition(dec, f, output_dir):
    """Store a decomposition and its source image as .npy arrays plus metadata"""
    out = ensure_writable_dir(output_dir)
    np.save(out / "phi.npy", dec.phi_stack())
    np.save(out / "response.npy", np.asarray(dec.response_sq))
    np.save(out / "t_values.npy", dec.grid.t_values)
    np.save(out / "tail.npy", dec.tail.values)
    np.save(out / "source.npy", f.values)
    meta = [
        f"mode = {dec.mode.value}",
        f"c_hat = {float(dec.c_hat)!r}",
        f"spacing = {dec.grid.spacing_tag}",
        f"n_scales = {len(dec)}",
        f"width = {f.width}",
        f"height = {f.height}",
    ]
    (out / DECOMPOSITION_META).write_text("\n".join(meta) + "\n", encoding="utf-8")
    logger.debug(f"Saved decomposition with {len(dec)} slices to {out}")


def _read_meta(path):
    meta = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            meta[key] = value
    return meta


def load_decomposition(directory):
    """
    Load a decomposition written by save_decomposition

    Returns:
        (SpectralDecomposition, source ScalarField)

    Raises:
        FileNotFoundError: the directory holds no saved decomposition
    """
    directory = Path(directory)
    meta_path = directory / DECOMPOSITION_META
    if not meta_path.exists():
        raise FileNotFoundError(f"No saved decomposition in {directory}")
    meta = _read_meta(meta_path)
    phi = np.load(directory / "phi.npy")
    dec = SpectralDecomposition(
        grid=ScaleGrid(np.load(directory / "t_values.npy"), meta.get("spacing", "explicit")),
        phi=tuple(ScalarField(p) for p in phi),
        response_sq=np.load(directory / "response.npy"),
        mode=Fidelity.parse(meta["mode"]),
        c_hat=float(meta["c_hat"]),
        tail=ScalarField(np.load(directory / "tail.npy")),
    )
    return dec, ScalarField(np.load(directory / "source.npy"))
