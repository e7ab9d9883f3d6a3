"""Little-endian feature-matrix files: 4-byte magic, u32 rows, u32 cols, float32 row-major."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import DataError

FRAMES_MAGIC = b"FRM1"
MFCC_MAGIC = b"MFC1"
_HEADER = struct.Struct("<4sII")


def encode_matrix(matrix: np.ndarray, magic: bytes) -> bytes:
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("feature files hold 2-D matrices")
    return _HEADER.pack(magic, m.shape[0], m.shape[1]) + m.astype("<f4").tobytes(order="C")


def decode_matrix(blob: bytes, magic: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise DataError(f"{source}: truncated header")
    tag, rows, cols = _HEADER.unpack_from(blob)
    if tag != magic:
        raise DataError(f"{source}: bad magic {tag!r}, expected {magic!r}")
    need = _HEADER.size + 4 * rows * cols
    if len(blob) != need:
        raise DataError(f"{source}: expected {need} bytes for {rows}x{cols}, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size, count=rows * cols)
    return data.reshape(rows, cols).astype(np.float64)


def write_matrix(path, matrix: np.ndarray, magic: bytes) -> None:
    Path(path).write_bytes(encode_matrix(matrix, magic))


def read_matrix(path, magic: bytes) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"missing feature file: {p}")
    return decode_matrix(p.read_bytes(), magic, str(p))
