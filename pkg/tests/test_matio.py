import numpy as np
import pytest

from ncaa.errors import DataError
from ncaa.matio import (
    MAGIC,
    load_matrix,
    load_matrix_binary,
    load_matrix_csv,
    matrix_from_bytes,
    matrix_to_bytes,
    save_matrix_binary,
    save_matrix_csv,
)


@pytest.fixture
def sample():
    rng = np.random.default_rng(42)
    return np.asfortranarray(rng.normal(size=(5, 3)))


def test_csv_roundtrip(tmp_path, sample):
    p = tmp_path / "m.csv"
    save_matrix_csv(p, sample)
    back = load_matrix_csv(p)
    assert np.array_equal(back, sample)


def test_binary_roundtrip(tmp_path, sample):
    p = tmp_path / "m.bin"
    save_matrix_binary(p, sample)
    back = load_matrix_binary(p)
    assert np.array_equal(back, sample)
    assert back.flags.f_contiguous


def test_binary_layout(sample):
    buf = matrix_to_bytes(sample)
    assert buf[:4] == MAGIC
    rows = int.from_bytes(buf[8:16], "little")
    cols = int.from_bytes(buf[16:24], "little")
    assert (rows, cols) == sample.shape
    # column-major payload: first 8 bytes after the header are entry (0,0),
    # the next are entry (1,0)
    first = np.frombuffer(buf[24:40], dtype="<f8")
    assert first[0] == sample[0, 0] and first[1] == sample[1, 0]


def test_binary_bad_magic():
    with pytest.raises(DataError, match="magic"):
        matrix_from_bytes(b"NOPE" + bytes(20))


def test_binary_truncated(sample):
    buf = matrix_to_bytes(sample)
    with pytest.raises(DataError, match="payload"):
        matrix_from_bytes(buf[:-8])


def test_csv_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1.0,2.0\n3.0,oops\n")
    with pytest.raises(DataError, match="line 2"):
        load_matrix_csv(p)


def test_csv_ragged_reports_line(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(DataError, match="line 2"):
        load_matrix_csv(p)


def test_load_matrix_sniffs_format(tmp_path, sample):
    b = tmp_path / "m.bin"
    c = tmp_path / "m.csv"
    save_matrix_binary(b, sample)
    save_matrix_csv(c, sample)
    assert np.array_equal(load_matrix(b), sample)
    assert np.array_equal(load_matrix(c), sample)


def test_nonfinite_rejected_on_load(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1.0,nan\n2.0,3.0\n")
    with pytest.raises(DataError):
        load_matrix_csv(p)


def test_missing_file():
    with pytest.raises(DataError):
        load_matrix("/nonexistent/file.bin")
