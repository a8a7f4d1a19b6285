"""PSFK binary exchange format for 2D arrays.

Layout (little-endian throughout):

========  ====  =====================================
offset    size  field
========  ====  =====================================
0         4     magic ``b"PSFK"``
4         4     version, u32 (currently 1)
8         1     dtype code, u8 (table below)
9         1     ndim, u8 (always 2)
10        14    reserved, must be zero
24        16    dims, 2 x u64 (rows, cols)
40        ...   payload, row-major
========  ====  =====================================

dtype codes: 0=float32, 1=float64, 2=complex64, 3=complex128, 4=uint8, 5=bool.
Complex payloads are interleaved (real, imag) pairs. The fixed 40-byte header
makes the payload offset constant for every reader.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .types import (
    ChannelData,
    CoherenceMap,
    ComplexImage,
    EnvelopeImage,
    FilterKernel,
    Psf,
    RegionMask,
    ScattererMap,
)

__all__ = [
    "write_array",
    "read_array",
    "PsfkError",
    "BadMagicError",
    "VersionError",
    "TruncatedError",
    "DimensionError",
]

MAGIC = b"PSFK"
VERSION = 1
HEADER_SIZE = 40

_DTYPE_CODES = {
    np.dtype(np.float32): 0,
    np.dtype(np.float64): 1,
    np.dtype(np.complex64): 2,
    np.dtype(np.complex128): 3,
    np.dtype(np.uint8): 4,
    np.dtype(np.bool_): 5,
}
_CODE_DTYPES = {code: dt for dt, code in _DTYPE_CODES.items()}
# little-endian on-disk forms
_WIRE_DTYPES = {0: "<f4", 1: "<f8", 2: "<c8", 3: "<c16", 4: "u1", 5: "u1"}


class PsfkError(Exception):
    """Base error for PSFK files."""


class BadMagicError(PsfkError):
    pass


class VersionError(PsfkError):
    pass


class TruncatedError(PsfkError):
    pass


class DimensionError(PsfkError):
    pass


def _payload(array) -> np.ndarray:
    for cls, attr in (
        (ComplexImage, "data"),
        (Psf, "data"),
        (FilterKernel, "taps"),
        (ScattererMap, "amps"),
        (RegionMask, "bits"),
        (CoherenceMap, "w"),
        (EnvelopeImage, "env"),
        (ChannelData, "rf"),
    ):
        if isinstance(array, cls):
            return getattr(array, attr)
    return np.asarray(array)


def write_array(path, array) -> None:
    """Write a 2D array (bare or any domain type) as a PSFK file.

    Parameters
    ----------
    path : path-like
        Destination file.
    array : ndarray or domain type
        2D payload; domain types contribute their grid (ComplexImage.data,
        Psf.patch.data, FilterKernel.taps, ...). The numpy dtype is preserved
        through the dtype-code table.
    """
    arr = _payload(array)
    if arr.ndim != 2:
        raise DimensionError(f"PSFK stores 2D arrays, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"zero-size dimension in shape {arr.shape}")
    if max(arr.shape) > 2 ** 32:
        raise DimensionError(f"dimension too large to exchange: {arr.shape}")
    dt = np.dtype(arr.dtype)
    if dt not in _DTYPE_CODES:
        raise PsfkError(f"unsupported dtype {dt}")
    code = _DTYPE_CODES[dt]
    header = MAGIC + struct.pack("<IBB", VERSION, code, 2) + b"\x00" * 14
    header += struct.pack("<QQ", arr.shape[0], arr.shape[1])
    payload = np.ascontiguousarray(arr).astype(_WIRE_DTYPES[code], copy=False)
    Path(path).write_bytes(header + payload.tobytes())


def read_array(path) -> np.ndarray:
    """Read a PSFK file back into the exact array write_array stored."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncatedError(f"file shorter than the {HEADER_SIZE}-byte header")
    if blob[:4] != MAGIC:
        raise BadMagicError(f"bad magic {blob[:4]!r}")
    version, code, ndim = struct.unpack("<IBB", blob[4:10])
    if version != VERSION:
        raise VersionError(f"unsupported version {version}")
    if any(blob[10:24]):
        raise PsfkError("reserved header bytes must be zero")
    if ndim != 2:
        raise DimensionError(f"unsupported ndim {ndim}")
    if code not in _CODE_DTYPES:
        raise PsfkError(f"unknown dtype code {code}")
    rows, cols = struct.unpack("<QQ", blob[24:40])
    if rows < 1 or cols < 1:
        raise DimensionError(f"zero-size dimension ({rows}, {cols})")
    wire = np.dtype(_WIRE_DTYPES[code])
    expected = rows * cols * wire.itemsize
    if len(blob) - HEADER_SIZE < expected:
        raise TruncatedError(
            f"payload holds {len(blob) - HEADER_SIZE} bytes, expected {expected}")
    flat = np.frombuffer(blob, dtype=wire, count=rows * cols, offset=HEADER_SIZE)
    return flat.reshape(rows, cols).astype(_CODE_DTYPES[code], copy=True)
