"""Clustering of a spectral response into scale bands, and band composites."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks
from skimage.filters import threshold_otsu

from ..core.grid import require_same_grid
from ..core.presets import PALETTE
from .spectral import FilterSpec, reconstruct, segment

logger = logging.getLogger(__name__)

BAND_METHODS = ("peaks", "otsu", "manual")
DEFAULT_MIN_PROMINENCE = 0.1
DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class Band:
    start_index: int
    end_index: int
    label: int
    color: tuple

    def __post_init__(self):
        if not 0 <= self.start_index <= self.end_index:
            raise ValueError(f"Invalid band interval [{self.start_index}, {self.end_index}]")

    @classmethod
    def labelled(cls, start_index, end_index, label):
        return cls(int(start_index), int(end_index), int(label), palette_color(label))

    def indices(self):
        return range(self.start_index, self.end_index + 1)

    def contains(self, index):
        return self.start_index <= index <= self.end_index

    def filter_spec(self, n):
        return FilterSpec.band_pass(n, self.start_index, self.end_index, weight_inf=0.0)


def palette_color(label):
    return PALETTE[label % len(PALETTE)]


def _as_response(response):
    arr = np.asarray(response, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("Response contains non-finite values")
    return arr


def detect_peaks(response, min_prominence=DEFAULT_MIN_PROMINENCE):
    """
    Indices of interior local maxima with enough prominence

    Args:
        response: Spectral response values
        min_prominence: Required prominence as a fraction of max(response)

    Returns:
        Sorted list of peak indices; a plateau maximum reports its leftmost index
    """
    arr = _as_response(response)
    if min_prominence < 0:
        raise ValueError(f"min_prominence must be nonnegative: {min_prominence}")
    if arr.size < 3 or arr.max() <= 0:
        return []
    _, props = find_peaks(arr, prominence=min_prominence * arr.max(), plateau_size=1)
    return sorted(int(i) for i in props["left_edges"])


def _runs(flags):
    """Maximal runs of True as inclusive (start, end) pairs"""
    runs = []
    start = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(flags) - 1))
    return runs


def _peak_bands(arr, min_prominence):
    peaks = detect_peaks(arr, min_prominence)
    if not peaks:
        return []
    # split at the lowest point between adjacent peaks; the split joins the left band
    splits = []
    for left, right in zip(peaks[:-1], peaks[1:]):
        between = arr[left : right + 1]
        splits.append(left + int(np.argmin(between)))
    starts = [0] + [s + 1 for s in splits]
    ends = splits + [arr.size - 1]
    return list(zip(starts, ends))


def _otsu_bands(arr):
    if np.ptp(arr) == 0:
        return []
    threshold = threshold_otsu(arr)
    logger.debug(f"Otsu threshold on response: {threshold:.6g}")
    return _runs(arr > threshold)


def _manual_bands(n, intervals):
    if not intervals:
        return []
    parsed = sorted((int(s), int(e)) for s, e in intervals)
    for start, end in parsed:
        if not 0 <= start <= end < n:
            raise ValueError(f"Manual band [{start}, {end}] outside 0..{n - 1}")
    for (_, prev_end), (start, _) in zip(parsed[:-1], parsed[1:]):
        if start <= prev_end:
            raise ValueError(f"Manual bands overlap at index {start}")
    return parsed


def cluster_bands(response, method="peaks", params=None):
    """
    Group scale indices into disjoint, ordered bands

    Args:
        response: Spectral response values
        method: "peaks" (one band per prominent peak; bands tile the whole
            index range and split at the minimum between neighbouring peaks),
            "otsu" (runs above the Otsu threshold) or "manual" (pass-through of
            explicit intervals)
        params: Method parameters: {"min_prominence": float} for peaks,
            {"intervals": [(start, end), ...]} for manual

    Returns:
        List of Band sorted by start index and labelled 0, 1, ...
    """
    arr = _as_response(response)
    params = params or {}
    if method == "peaks":
        intervals = _peak_bands(arr, params.get("min_prominence", DEFAULT_MIN_PROMINENCE))
    elif method == "otsu":
        intervals = _otsu_bands(arr)
    elif method == "manual":
        intervals = _manual_bands(arr.size, params.get("intervals", []))
    else:
        raise ValueError(f"Unknown band method: {method} (available: {', '.join(BAND_METHODS)})")
    bands = [Band.labelled(s, e, label) for label, (s, e) in enumerate(intervals)]
    logger.info(
        f"{method} clustering: {len(bands)} band(s) "
        + " ".join(f"[{b.start_index}-{b.end_index}]" for b in bands)
    )
    return bands


def band_reconstructions(dec, bands):
    """One reconstruction per band, with H the band indicator and H(inf) = 0"""
    n = len(dec)
    for band in bands:
        if band.end_index >= n:
            raise ValueError(f"Band [{band.start_index}, {band.end_index}] exceeds {n} scales")
    return [reconstruct(dec, band.filter_spec(n)) for band in bands]


def colorize_bands(dec, bands, f, epsilon=DEFAULT_EPSILON):
    """
    Colour-coded composite of the band reconstructions

    Each pixel takes the colour of the band with the largest reconstruction
    value, scaled by the gray value of f, when that value exceeds epsilon;
    otherwise it is black.

    Returns:
        Float array of shape (height, width, 3)
    """
    require_same_grid(dec.tail, f)
    rgb = np.zeros(f.shape + (3,))
    if not bands:
        return rgb
    stack = np.stack([r.values for r in band_reconstructions(dec, bands)])
    winner = np.argmax(stack, axis=0)
    best = np.take_along_axis(stack, winner[None], axis=0)[0]
    colors = np.array([band.color for band in bands])
    lit = best > epsilon
    rgb[lit] = colors[winner[lit]] * f.values[lit][:, None]
    return rgb


def band_energy_fraction(reconstruction, mask, f):
    """Share of f's in-mask energy <f, f>_mask captured by a reconstruction"""
    require_same_grid(reconstruction, mask, f)
    inside = mask.values > 0.5
    denom = float((f.values[inside] ** 2).sum())
    if denom <= 0:
        return 0.0
    return float((reconstruction.values[inside] * f.values[inside]).sum()) / denom


def band_mask(dec, band, epsilon=DEFAULT_EPSILON):
    """Segmentation mask of one band (delegates to spectral.segment)"""
    return segment(dec, band.filter_spec(len(dec)), epsilon)

