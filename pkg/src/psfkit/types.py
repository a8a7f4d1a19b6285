"""Core domain types shared by every module.

All arrays are indexed [n_z x n_x] (row = axial/depth sample, column = lateral
position). Instances are immutable after construction: dataclasses are frozen
and the backing numpy arrays are marked read-only, so values are safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "ArrayGeometry",
    "Pulse",
    "AberrationProfile",
    "GridSpec",
    "ComplexImage",
    "Psf",
    "FilterKernel",
    "ScattererMap",
    "RegionMask",
    "CoherenceMap",
    "EnvelopeImage",
    "ChannelData",
    "center_psf",
]


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _readonly(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _finite(a: np.ndarray, name: str) -> None:
    _check(bool(np.isfinite(a).all()), f"{name} contains non-finite values")


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Linear-array imaging geometry.

    Parameters
    ----------
    n_elements : int
        Element count, >= 1.
    pitch : float
        Element spacing in meters.
    element_x : array_like
        Lateral element positions in meters, strictly increasing and
        symmetric about 0.
    f0, c0, fs : float
        Carrier frequency (Hz), speed of sound (m/s), sampling rate (Hz);
        fs must exceed 2*f0.
    tx_focus : (float, float)
        Transmit focus (x, z) in meters, z > 0.
    """

    n_elements: int
    pitch: float
    element_x: np.ndarray
    f0: float
    c0: float
    fs: float
    tx_focus: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "element_x", _readonly(self.element_x, np.float64))
        object.__setattr__(self, "tx_focus", (float(self.tx_focus[0]), float(self.tx_focus[1])))
        _check(self.n_elements >= 1, "n_elements must be >= 1")
        _check(self.pitch > 0, "pitch must be > 0")
        _check(self.element_x.ndim == 1 and len(self.element_x) == self.n_elements,
               "element_x length must equal n_elements")
        _finite(self.element_x, "element_x")
        if self.n_elements > 1:
            _check(bool(np.all(np.diff(self.element_x) > 0)), "element_x must be strictly increasing")
        _check(abs(self.element_x[0] + self.element_x[-1]) <= 1e-12,
               "element_x must be symmetric about 0")
        _check(self.c0 > 0, "c0 must be > 0")
        _check(self.f0 > 0, "f0 must be > 0")
        _check(self.fs > 2 * self.f0, "fs must exceed 2*f0")
        _check(self.tx_focus[1] > 0, "tx_focus depth must be > 0")

    @classmethod
    def linear(cls, n_elements, pitch, f0, c0, fs, tx_focus) -> "ArrayGeometry":
        """Build a centered linear array from element count and pitch."""
        x = (np.arange(n_elements) - (n_elements - 1) / 2) * pitch
        return cls(n_elements, pitch, x, f0, c0, fs, tuple(tx_focus))

    @property
    def aperture(self) -> float:
        """Physical aperture span element_x[-1] - element_x[0], meters."""
        if self.n_elements == 1:
            return self.pitch
        return float(self.element_x[-1] - self.element_x[0])


@dataclass(frozen=True)
class Pulse:
    """Gaussian-windowed sinusoidal excitation with unit peak envelope."""

    f0: float
    fractional_bandwidth: float
    duration: float

    def __post_init__(self):
        _check(self.f0 > 0, "f0 must be > 0")
        _check(0 < self.fractional_bandwidth <= 1, "fractional_bandwidth must be in (0, 1]")
        _check(self.duration > 0, "duration must be > 0")

    @property
    def sigma_t(self) -> float:
        # -6 dB fractional bandwidth of the envelope spectrum
        return np.sqrt(2 * np.log(2)) / (np.pi * self.fractional_bandwidth * self.f0)

    def waveform(self, t):
        """Evaluate the pulse at times ``t`` (seconds); zero outside +/-duration/2."""
        t = np.asarray(t, dtype=np.float64)
        v = np.exp(-0.5 * (t / self.sigma_t) ** 2) * np.cos(2 * np.pi * self.f0 * t)
        return np.where(np.abs(t) <= self.duration / 2, v, 0.0)


@dataclass(frozen=True, eq=False)
class AberrationProfile:
    """Per-element time delays of a near-field phase screen."""

    delays: np.ndarray
    rms_target: float
    corr_len: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "delays", _readonly(self.delays, np.float64))
        _check(self.delays.ndim == 1, "delays must be 1D")
        _finite(self.delays, "delays")
        _check(self.rms_target >= 0, "rms_target must be >= 0")
        if self.rms_target == 0:
            _check(bool(np.all(self.delays == 0)), "zero rms_target requires all-zero delays")
        else:
            _check(abs(float(self.delays.mean())) <= 1e-15, "delays must have zero mean")
            rms = float(np.sqrt(np.mean(self.delays ** 2)))
            _check(abs(rms - self.rms_target) <= 1e-3 * self.rms_target,
                   "sample RMS must equal rms_target within 0.1%")

    def __len__(self) -> int:
        return len(self.delays)

    @classmethod
    def zero(cls, n_elements: int) -> "AberrationProfile":
        return cls(np.zeros(n_elements), 0.0, 0.0, 0)


@dataclass(frozen=True)
class GridSpec:
    """Rectilinear image grid: pixel (i, j) sits at (z0 + i*dz, x0 + j*dx)."""

    n_z: int
    n_x: int
    dx: float
    dz: float
    origin: tuple[float, float]  # (x0, z0)

    def __post_init__(self):
        _check(self.n_z >= 1 and self.n_x >= 1, "grid must have at least one pixel per axis")
        _check(self.dx > 0 and self.dz > 0, "dx and dz must be > 0")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_z, self.n_x)

    def x_axis(self) -> np.ndarray:
        return self.origin[0] + np.arange(self.n_x) * self.dx

    def z_axis(self) -> np.ndarray:
        return self.origin[1] + np.arange(self.n_z) * self.dz

    @classmethod
    def centered(cls, n_z, n_x, dx, dz, center=(0.0, 0.0)) -> "GridSpec":
        """Grid whose middle pixel ((n_z-1)//2, (n_x-1)//2) lies at ``center`` (x, z)."""
        x0 = center[0] - ((n_x - 1) // 2) * dx
        z0 = center[1] - ((n_z - 1) // 2) * dz
        return cls(n_z, n_x, dx, dz, (x0, z0))


class _GriddedArray:
    """Shared validation for 2D grids carrying pixel spacing."""

    data_attr = "data"

    def _init_grid(self, arr, dtype, name):
        object.__setattr__(self, self.data_attr, _readonly(arr, dtype))
        a = getattr(self, self.data_attr)
        _check(a.ndim == 2, f"{name} must be 2D")
        _check(a.shape[0] >= 1 and a.shape[1] >= 1, f"{name} must be nonempty")
        _finite(a, name)
        _check(self.dx > 0 and self.dz > 0, "dx and dz must be > 0")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return getattr(self, self.data_attr).shape

    @property
    def grid(self) -> GridSpec:
        nz, nx = self.shape
        return GridSpec(nz, nx, self.dx, self.dz, self.origin)


@dataclass(frozen=True, eq=False)
class ComplexImage(_GriddedArray):
    """2D complex baseband (IQ) image on a physical grid."""

    data: np.ndarray
    dx: float
    dz: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self._init_grid(self.data, np.complex128, "data")

    def with_data(self, data) -> "ComplexImage":
        """Same grid, new samples."""
        data = np.asarray(data)
        _check(data.shape == self.data.shape, "replacement data must keep the shape")
        return ComplexImage(data, self.dx, self.dz, self.origin)


@dataclass(frozen=True, eq=False)
class Psf:
    """Centered, peak-normalized PSF patch (odd dims); operand of filter design."""

    patch: ComplexImage
    center: tuple[int, int]  # (row, col) anchor

    def __post_init__(self):
        nz, nx = self.patch.shape
        _check(nz % 2 == 1 and nx % 2 == 1, "psf dims must be odd")
        object.__setattr__(self, "center", (int(self.center[0]), int(self.center[1])))
        _check(self.center == ((nz - 1) // 2, (nx - 1) // 2), "center must be the middle index")
        env = np.abs(self.patch.data)
        peak = np.unravel_index(int(np.argmax(env)), env.shape)
        _check(max(abs(peak[0] - self.center[0]), abs(peak[1] - self.center[1])) <= 1,
               "envelope peak must lie within one pixel of center")
        _check(abs(env[peak] - 1.0) <= 1e-9, "peak magnitude must be normalized to 1")

    @property
    def data(self) -> np.ndarray:
        return self.patch.data

    @property
    def shape(self) -> tuple[int, int]:
        return self.patch.shape


@dataclass(frozen=True, eq=False)
class FilterKernel:
    """Complex convolution kernel with center anchor (odd dims)."""

    taps: np.ndarray
    anchor: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "taps", _readonly(self.taps, np.complex128))
        _check(self.taps.ndim == 2, "taps must be 2D")
        nz, nx = self.taps.shape
        _check(nz % 2 == 1 and nx % 2 == 1, "kernel dims must be odd")
        _finite(self.taps, "taps")
        object.__setattr__(self, "anchor", (int(self.anchor[0]), int(self.anchor[1])))
        _check(self.anchor == ((nz - 1) // 2, (nx - 1) // 2), "anchor must be the center index")

    @classmethod
    def from_taps(cls, taps) -> "FilterKernel":
        taps = np.asarray(taps)
        return cls(taps, ((taps.shape[0] - 1) // 2, (taps.shape[1] - 1) // 2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.taps.shape


@dataclass(frozen=True, eq=False)
class ScattererMap(_GriddedArray):
    """Gridded scatterer amplitudes on the same lattice as the target image."""

    data_attr = "amps"

    amps: np.ndarray
    dx: float
    dz: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self._init_grid(self.amps, np.float64, "amps")


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean evaluation region with a label."""

    bits: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "bits", _readonly(self.bits, np.bool_))
        _check(self.bits.ndim == 2, "bits must be 2D")

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape


@dataclass(frozen=True, eq=False)
class CoherenceMap:
    """Per-pixel coherence index in [0, 1]."""

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _readonly(self.w, np.float64))
        _check(self.w.ndim == 2, "w must be 2D")
        _finite(self.w, "w")
        _check(bool((self.w >= 0).all() and (self.w <= 1).all()), "w must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape


@dataclass(frozen=True, eq=False)
class EnvelopeImage(_GriddedArray):
    """Detected envelope (nonnegative) on a physical grid."""

    data_attr = "env"

    env: np.ndarray
    dx: float
    dz: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self._init_grid(self.env, np.float64, "env")
        _check(bool((self.env >= 0).all()), "env must be nonnegative")


@dataclass(frozen=True, eq=False)
class ChannelData:
    """Raw per-element RF traces: rf[element, sample] starting at time t0."""

    rf: np.ndarray
    fs: float
    t0: float

    def __post_init__(self):
        object.__setattr__(self, "rf", _readonly(self.rf, np.float64))
        _check(self.rf.ndim == 2, "rf must be 2D [n_elements x n_samples]")
        _check(self.rf.shape[1] >= 1, "need at least one sample")
        _finite(self.rf, "rf")
        _check(self.fs > 0, "fs must be > 0")

    @property
    def n_elements(self) -> int:
        return self.rf.shape[0]

    @property
    def n_samples(self) -> int:
        return self.rf.shape[1]

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) / self.fs


def center_psf(raw) -> Psf:
    """Normalize a raw patch into a PSF: peak at center, odd dims, unit peak.

    Parameters
    ----------
    raw : ComplexImage or ndarray
        Beamformed patch around a point response. Must not be identically zero.

    Returns
    -------
    Psf
        The envelope argmax is circularly shifted to the middle index, even
        dims are trimmed by one trailing row/column, and the patch is scaled
        to unit peak magnitude. Idempotent: re-centering a centered PSF is a
        bit-exact no-op.
    """
    if isinstance(raw, ComplexImage):
        data, dx, dz = raw.data, raw.dx, raw.dz
    else:
        data = np.asarray(raw)
        dx = dz = 1.0
    if data.ndim != 2:
        raise ValueError("psf patch must be 2D")
    data = data.astype(np.complex128, copy=True)
    env = np.abs(data)
    if not env.any():
        raise ValueError("cannot center an all-zero patch")

    nz, nx = data.shape
    cz, cx = (nz - 1) // 2, (nx - 1) // 2
    iz, ix = np.unravel_index(int(np.argmax(env)), env.shape)
    if (iz, ix) != (cz, cx):
        data = np.roll(data, (cz - iz, cx - ix), axis=(0, 1))
    # trailing trim keeps the center index valid for even sizes
    data = data[: nz - (1 - nz % 2), : nx - (1 - nx % 2)]

    peak = abs(data[cz, cx])
    if abs(peak - 1.0) > 1e-12:
        data = data / peak
    patch = ComplexImage(data, dx, dz, origin=(-cx * dx, -cz * dz))
    return Psf(patch, (cz, cx))
