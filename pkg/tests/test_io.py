import numpy as np
import pytest

from qrlev.io import format_float, read_matrix, write_matrix


def test_format_float_roundtrips():
    for x in (0.0, 1.0, -1.5, 1e-300, -3.141592653589793, 0.1 + 0.2, 1e17):
        assert float(format_float(x)) == x


def test_matrix_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(10)
    a = rng.standard_normal((13, 4)) * 10.0 ** rng.integers(-200, 200, (13, 4))
    path = tmp_path / "m.txt"
    write_matrix(a, path)
    np.testing.assert_array_equal(read_matrix(path), a)


def test_header_shape(tmp_path):
    path = tmp_path / "m.txt"
    write_matrix(np.eye(3), path)
    assert path.read_text().splitlines()[0] == "3 3"


def test_header_mismatch_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 2\n3 4\n5 6\n")
    with pytest.raises(ValueError, match="promises"):
        read_matrix(path)


def test_malformed_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("banana\n")
    with pytest.raises(ValueError, match="header"):
        read_matrix(path)
