"""Envelope detection, log compression, grayscale export, and line profiles."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import presets
from .types import CoherenceMap, ComplexImage, EnvelopeImage, GridSpec

__all__ = ["envelope", "log_compress", "write_image", "read_pgm", "lateral_profile"]


def envelope(img: ComplexImage) -> EnvelopeImage:
    """Detected envelope: per-pixel magnitude of the complex baseband."""
    return EnvelopeImage(np.abs(img.data), img.dx, img.dz, img.origin)


def log_compress(env, dynamic_range_db: float = presets.DYNAMIC_RANGE_DB) -> np.ndarray:
    """Map an envelope to 8-bit grayscale over a dB display range.

    The image is normalized by its maximum; values are clamped to
    [-dynamic_range_db, 0] dB and mapped linearly to [0, 255] with
    round-half-away-from-zero. Zero pixels (and an all-zero image) map to 0.
    """
    if dynamic_range_db <= 0:
        raise ValueError("dynamic_range_db must be > 0")
    data = env.env if isinstance(env, EnvelopeImage) else np.asarray(env, dtype=np.float64)
    top = data.max()
    if top == 0:
        return np.zeros(data.shape, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(data / top)
    db = np.maximum(db, -dynamic_range_db)
    scaled = (db + dynamic_range_db) / dynamic_range_db * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def write_image(byte_img: np.ndarray, path, format: str = "pgm") -> None:
    """Write an 8-bit grayscale image; PGM natively, PNG via Pillow."""
    byte_img = np.asarray(byte_img)
    if byte_img.dtype != np.uint8 or byte_img.ndim != 2:
        raise ValueError("write_image expects a 2D uint8 array")
    if format == "pgm":
        h, w = byte_img.shape
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        Path(path).write_bytes(header + byte_img.tobytes())
    elif format == "png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise RuntimeError("PNG output requires Pillow (install the 'png' extra)") from exc
        Image.fromarray(byte_img, mode="L").save(str(path), format="PNG")
    else:
        raise ValueError(f"unknown image format {format!r}")


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM file back into a uint8 array."""
    blob = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM supported")
    data = np.frombuffer(blob, dtype=np.uint8, count=w * h, offset=pos)
    return data.reshape(h, w).copy()


def lateral_profile(img, depth_z: float, linear: bool = False,
                    grid: GridSpec | None = None) -> list[tuple[float, float]]:
    """Extract the image row nearest a depth as (x, value) pairs.

    In dB mode (default) the row is normalized to its maximum and zero pixels
    become -inf sentinels. ``linear=True`` returns raw row values, which is
    the useful form for CoherenceMap rows. Inputs without grid metadata
    (CoherenceMap, bare arrays) need an explicit ``grid``.
    """
    if isinstance(img, (EnvelopeImage, ComplexImage)):
        data = np.abs(img.env if isinstance(img, EnvelopeImage) else img.data)
        grid = grid or img.grid
    elif isinstance(img, CoherenceMap):
        data = img.w
    else:
        data = np.abs(np.asarray(img))
    if grid is None:
        raise ValueError("grid metadata required for this input")
    zs = grid.z_axis()
    if not (zs[0] <= depth_z <= zs[-1]):
        raise ValueError(f"depth {depth_z} outside the grid [{zs[0]}, {zs[-1]}]")
    row = data[int(np.argmin(np.abs(zs - depth_z)))].astype(np.float64)
    xs = grid.x_axis()
    if linear:
        values = row
    else:
        top = row.max()
        if top > 0:
            with np.errstate(divide="ignore"):
                values = 20 * np.log10(row / top)
        else:
            values = np.full_like(row, -np.inf)
    return [(float(x), float(v)) for x, v in zip(xs, values)]
