"""Matrix file I/O: CSV (one row per line) and the versioned binary format.

Binary layout: magic "NCAA", u32 version=1, u64 rows, u64 cols, then
rows*cols little-endian float64 values in column-major order.
"""

import struct

import numpy as np

from .errors import DataError
from .linalg import as_matrix

MAGIC = b"NCAA"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

__all__ = [
    "save_matrix_csv",
    "load_matrix_csv",
    "save_matrix_binary",
    "load_matrix_binary",
    "matrix_to_bytes",
    "matrix_from_bytes",
    "load_matrix",
    "save_matrix",
]


def save_matrix_csv(path, a):
    a = as_matrix(a)
    np.savetxt(path, a, fmt="%.17g", delimiter=",")


def load_matrix_csv(path):
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {_locate_csv_fault(path)}") from exc
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if a.size == 0:
        raise DataError(f"{path}: empty matrix file")
    return as_matrix(a, name=str(path))


def _locate_csv_fault(path):
    """Best-effort line/offset report for a CSV that np.loadtxt rejected."""
    width = None
    try:
        with open(path, "r") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                fields = line.strip().split(",")
                if width is None:
                    width = len(fields)
                elif len(fields) != width:
                    return (
                        f"line {lineno}: expected {width} fields, "
                        f"got {len(fields)}"
                    )
                for col, field in enumerate(fields, start=1):
                    try:
                        float(field)
                    except ValueError:
                        return f"line {lineno}, field {col}: not a number ({field!r})"
    except OSError as exc:
        return str(exc)
    return "malformed CSV"


def matrix_to_bytes(a):
    a = as_matrix(a)
    header = _HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1])
    body = a.astype("<f8", copy=False).tobytes(order="F")
    return header + body


def matrix_from_bytes(buf, name="buffer"):
    if len(buf) < _HEADER.size:
        raise DataError(f"{name}: truncated header (offset 0)")
    magic, version, rows, cols = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise DataError(f"{name}: bad magic {magic!r} (offset 0)")
    if version != VERSION:
        raise DataError(f"{name}: unsupported version {version} (offset 4)")
    need = rows * cols * 8
    body = buf[_HEADER.size:]
    if len(body) != need:
        raise DataError(
            f"{name}: payload is {len(body)} bytes, expected {need} "
            f"(offset {_HEADER.size})"
        )
    data = np.frombuffer(body, dtype="<f8", count=rows * cols)
    return as_matrix(data.reshape((rows, cols), order="F"), name=name)


def save_matrix_binary(path, a):
    with open(path, "wb") as fh:
        fh.write(matrix_to_bytes(a))


def load_matrix_binary(path):
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return matrix_from_bytes(buf, name=str(path))


def load_matrix(path):
    """Load either format, sniffing the binary magic first."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if head == MAGIC:
        return load_matrix_binary(path)
    return load_matrix_csv(path)


def save_matrix(path, a):
    """Pick the format from the extension: .bin/.ncaa binary, else CSV."""
    name = str(path)
    if name.endswith(".bin") or name.endswith(".ncaa"):
        save_matrix_binary(path, a)
    else:
        save_matrix_csv(path, a)
