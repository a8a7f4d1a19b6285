"""Default imaging parameters and named aberrator presets.

Everything here is a convenience; every operation accepts explicit values.
The axial pixel DZ is tied to the carrier so that one two-way carrier period
spans exactly three axial samples, which lets the beamformer's moving-average
low-pass place an exact null on the demodulation image frequency.
"""

from __future__ import annotations

from .types import ArrayGeometry, GridSpec, Pulse

F0 = 5e6
C0 = 1540.0
FS = 40e6
N_ELEMENTS = 64
PITCH = 0.154e-3  # lambda/2 at 5 MHz
BANDWIDTH = 0.6
TX_FOCUS = (0.0, 25e-3)

DX = 0.1e-3
DZ = C0 / (6 * F0)  # three axial samples per two-way carrier period

PATCH_SHAPE = (65, 33)  # (axial, lateral) PSF patch extent
KERNEL_SHAPE = (41, 21)  # (axial, lateral) restoration kernel extent
EPS = 1e-2
M0 = 1
AXES = "lateral"  # coherence spectrum: per-row lateral DFTs by default
P_EXPONENT = 1.0
DYNAMIC_RANGE_DB = 60.0
GCNR_BINS = 256
DEFAULT_SEED = 7

# (rms seconds, correlation length in elements)
ABERRATOR_PRESETS = {
    "mild": (25e-9, 5.0),
    "moderate": (50e-9, 5.0),
    "severe": (75e-9, 5.0),
}


def default_geometry(**overrides) -> ArrayGeometry:
    args = dict(n_elements=N_ELEMENTS, pitch=PITCH, f0=F0, c0=C0, fs=FS, tx_focus=TX_FOCUS)
    args.update(overrides)
    return ArrayGeometry.linear(**args)


def default_pulse(f0: float = F0, fractional_bandwidth: float = BANDWIDTH) -> Pulse:
    sigma = Pulse(f0, fractional_bandwidth, 1.0).sigma_t
    # +/-4 sigma support keeps the truncated tail 69 dB down
    return Pulse(f0, fractional_bandwidth, 8 * sigma)


def default_grid(n_z: int = 256, n_x: int = 256, center=None) -> GridSpec:
    if center is None:
        center = TX_FOCUS
    return GridSpec.centered(n_z, n_x, DX, DZ, center=(center[0], center[1]))
