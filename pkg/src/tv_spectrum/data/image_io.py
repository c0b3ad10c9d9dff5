"""Grayscale image input (PGM P2/P5, 8/16-bit PNG) and PGM/PPM output."""

import logging
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..core.errors import ImageFormatError
from ..core.grid import ScalarField

logger = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Pillow modes accepted as grayscale PNG, with the maximum sample value
PNG_MODE_MAXVAL = {
    "1": 1,
    "L": 255,
    "I;16": 65535,
    "I;16B": 65535,
    "I;16L": 65535,
    "I": 65535,
}


def _pnm_tokens(data, count, path):
    """
    Read ``count`` whitespace-separated header tokens, skipping comments

    Returns:
        (tokens, offset) where offset is the index just past the last token
    """
    tokens = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos : pos + 1].isspace():
            pos += 1
        if pos < size and data[pos : pos + 1] == b"#":
            while pos < size and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= size:
            raise ImageFormatError("truncated", path, "header ends early")
        start = pos
        while pos < size and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _read_pgm(data, path):
    magic = data[:2]
    tokens, offset = _pnm_tokens(data[2:], 3, path)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError("unknown-format", path, "non-numeric PGM header")
    if width <= 0 or height <= 0:
        raise ImageFormatError("zero-dimensions", path, f"{width}x{height}")
    if not 0 < maxval < 65536:
        raise ImageFormatError("unknown-format", path, f"maxval {maxval}")
    n = width * height

    if magic == b"P2":
        samples = data[offset:].split()
        if len(samples) < n:
            raise ImageFormatError("truncated", path, f"{len(samples)} of {n} samples")
        try:
            values = np.array([int(s) for s in samples[:n]], dtype=np.float64)
        except ValueError:
            raise ImageFormatError("unknown-format", path, "non-numeric P2 sample")
    else:
        # a single whitespace byte separates the header from the raster
        offset += 1
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        raster = data[offset : offset + n * dtype.itemsize]
        if len(raster) < n * dtype.itemsize:
            raise ImageFormatError(
                "truncated", path, f"{len(raster)} of {n * dtype.itemsize} raster bytes"
            )
        values = np.frombuffer(raster, dtype=dtype).astype(np.float64)

    return ScalarField((values / maxval).reshape(height, width))


def _read_png(path):
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode not in PNG_MODE_MAXVAL:
                raise ImageFormatError("unsupported-mode", path, f"PNG mode {mode}")
            if img.width == 0 or img.height == 0:
                raise ImageFormatError("zero-dimensions", path)
            values = np.asarray(img, dtype=np.float64)
    except UnidentifiedImageError:
        raise ImageFormatError("unknown-format", path, "unreadable PNG")
    except (OSError, SyntaxError) as e:
        raise ImageFormatError("truncated", path, str(e))
    return ScalarField(values / PNG_MODE_MAXVAL[mode])


def read_image(path):
    """
    Read a grayscale image into a ScalarField with values in [0, 1]

    Args:
        path: PGM (P2 or P5, 8 or 16 bit) or grayscale PNG file

    Returns:
        ScalarField, rows top to bottom

    Raises:
        FileNotFoundError: path does not exist
        ImageFormatError: unknown format, truncated data or zero dimensions
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No such image: {path}")
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        field = _read_pgm(data, path)
    elif data.startswith(PNG_SIGNATURE):
        field = _read_png(path)
    else:
        raise ImageFormatError("unknown-format", path, f"magic {data[:8]!r}")
    logger.info(f"Read {field.width}x{field.height} image from {path}")
    return field


def _quantize(values, maxval):
    clipped = np.clip(values, 0.0, 1.0)
    return np.rint(clipped * maxval).astype(np.uint16 if maxval > 255 else np.uint8)


def write_pgm(u, path, maxval=255):
    """
    Write a field as binary PGM (P5), clamped to [0, 1]

    Args:
        u: ScalarField
        path: Output path
        maxval: 255 for 8-bit or up to 65535 for 16-bit samples
    """
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval must be in 1..65535: {maxval}")
    samples = _quantize(u.values, maxval)
    if maxval > 255:
        samples = samples.astype(">u2")
    header = f"P5\n{u.width} {u.height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(samples.tobytes())
    logger.debug(f"Wrote {path}")


def write_ppm(rgb, path):
    """Write an (height, width, 3) float array in [0, 1] as 8-bit binary PPM (P6)"""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"Expected an (height, width, 3) array, got {rgb.shape}")
    height, width = rgb.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(_quantize(rgb, 255).tobytes())
    logger.debug(f"Wrote {path}")


def ensure_writable_dir(path):
    """Create a directory if needed and check it can be written to"""
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {path}")
    return Path(path)
