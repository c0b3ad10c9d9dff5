import numpy as np
import pytest
from PIL import Image

from tv_spectrum.core.errors import ImageFormatError
from tv_spectrum.core.grid import ScalarField
from tv_spectrum.data.image_io import read_image, write_pgm, write_ppm


def write_bytes(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return path


def test_ascii_pgm(tmp_path):
    path = write_bytes(tmp_path, "a.pgm", b"P2\n# comment\n2 1\n255\n0 255\n")
    assert read_image(path).values.tolist() == [[0.0, 1.0]]


def test_binary_pgm_16_bit(tmp_path):
    raster = np.array([32768, 65535], dtype=">u2").tobytes()
    path = write_bytes(tmp_path, "b.pgm", b"P5\n2 1\n65535\n" + raster)
    values = read_image(path).values
    assert values[0, 0] == pytest.approx(32768 / 65535)
    assert values[0, 1] == 1.0


def test_binary_pgm_rows_top_to_bottom(tmp_path):
    path = write_bytes(tmp_path, "c.pgm", b"P5 2 2 255\n" + bytes([0, 51, 102, 255]))
    assert read_image(path).values == pytest.approx(np.array([[0.0, 0.2], [0.4, 1.0]]))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_image(tmp_path / "nope.pgm")


@pytest.mark.parametrize(
    "data, reason",
    [
        (b"P5\n4 4\n255\n" + bytes(10), "truncated"),
        (b"P2\n3 1\n255\n0 1\n", "truncated"),
        (b"P5\n0 3\n255\n", "zero-dimensions"),
        (b"GIF89a....", "unknown-format"),
        (b"P5\n2", "truncated"),
    ],
)
def test_malformed_files(tmp_path, data, reason):
    path = write_bytes(tmp_path, "bad.img", data)
    with pytest.raises(ImageFormatError) as excinfo:
        read_image(path)
    assert excinfo.value.reason == reason


def test_png_8_bit(tmp_path):
    path = tmp_path / "g.png"
    Image.fromarray(np.array([[0, 255], [51, 102]], dtype=np.uint8)).save(path)
    assert read_image(path).values == pytest.approx(np.array([[0.0, 1.0], [0.2, 0.4]]))


def test_png_16_bit(tmp_path):
    path = tmp_path / "g16.png"
    Image.fromarray(np.array([[0, 65535, 32768]], dtype=np.uint16)).save(path)
    values = read_image(path).values
    assert values[0, 1] == 1.0
    assert values[0, 2] == pytest.approx(32768 / 65535)


def test_colour_png_is_rejected(tmp_path):
    path = tmp_path / "rgb.png"
    Image.new("RGB", (2, 2)).save(path)
    with pytest.raises(ImageFormatError) as excinfo:
        read_image(path)
    assert excinfo.value.reason == "unsupported-mode"


@pytest.mark.parametrize("maxval", [255, 65535])
def test_pgm_round_trip(tmp_path, rng, maxval):
    u = ScalarField(rng.random((7, 5)))
    path = tmp_path / "u.pgm"
    write_pgm(u, path, maxval=maxval)
    back = read_image(path)
    assert back.shape == u.shape
    assert np.max(np.abs(back.values - u.values)) <= 1.0 / (2 * maxval) + 1e-12


def test_pgm_output_is_clamped(tmp_path):
    path = tmp_path / "clamped.pgm"
    write_pgm(ScalarField.from_flat(3, 1, [-0.5, 0.5, 2.0]), path)
    assert path.read_bytes() == b"P5\n3 1\n255\n" + bytes([0, 128, 255])


def test_ppm_output(tmp_path):
    rgb = np.zeros((1, 2, 3))
    rgb[0, 1] = (1.0, 0.5, 0.0)
    path = tmp_path / "c.ppm"
    write_ppm(rgb, path)
    assert path.read_bytes() == b"P6\n2 1\n255\n" + bytes([0, 0, 0, 255, 128, 0])
    with pytest.raises(ValueError):
        write_ppm(np.zeros((2, 2)), path)
