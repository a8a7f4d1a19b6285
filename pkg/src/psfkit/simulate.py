"""Point-scatterer ultrasound simulator and speckle synthesis.

A focused transmit insonifies point scatterers through a near-field phase
screen (per-element delays applied on both transmit and receive); channel RF
is beamformed by dynamic-receive delay-and-sum with nominal delays and
demodulated to complex baseband. Speckle images are synthesized separately by
convolving a scatterer map with a PSF patch, which is orders of magnitude
cheaper than channel simulation and is the model the restoration filter
assumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_erosion
from scipy.signal import fftconvolve

from . import presets
from .types import (
    AberrationProfile,
    ArrayGeometry,
    ChannelData,
    ComplexImage,
    GridSpec,
    Psf,
    Pulse,
    RegionMask,
    ScattererMap,
    center_psf,
)

__all__ = [
    "make_aberration_profile",
    "simulate_channel_data",
    "beamform_das",
    "simulate_psf",
    "PhantomSpec",
    "make_phantom",
    "synth_speckle",
]


def make_aberration_profile(n_elements: int, rms: float, corr_len: float, seed: int) -> AberrationProfile:
    """Generate near-field phase-screen delays.

    White Gaussian noise is smoothed with a Gaussian window of standard
    deviation ``corr_len`` elements, mean-removed, and renormalized so the
    sample RMS equals ``rms`` exactly.

    Parameters
    ----------
    n_elements : int
        Profile length; must be >= 2 when rms > 0.
    rms : float
        Target RMS delay in seconds (0 gives the zero profile).
    corr_len : float
        Smoothing window std in elements; 0 leaves the noise white.
    seed : int
        Generator seed; the profile is a pure function of the arguments.
    """
    if rms < 0:
        raise ValueError("rms must be >= 0")
    if corr_len < 0:
        raise ValueError("corr_len must be >= 0")
    if rms == 0:
        return AberrationProfile(np.zeros(n_elements), 0.0, corr_len, seed)
    if n_elements < 2:
        raise ValueError("need n_elements >= 2 for a zero-mean profile with rms > 0")

    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(n_elements)
    if corr_len > 0:
        half = int(np.ceil(4 * corr_len))
        t = np.arange(-half, half + 1)
        win = np.exp(-0.5 * (t / corr_len) ** 2)
        raw = np.convolve(raw, win / win.sum(), mode="same")
    raw = raw - raw.mean()
    sample_rms = np.sqrt(np.mean(raw ** 2))
    if sample_rms == 0:  # pathological seed; cannot renormalize
        raise ValueError("degenerate profile draw, choose another seed")
    delays = raw * (rms / sample_rms)
    return AberrationProfile(delays, rms, corr_len, seed)


def _tx_delays(geom: ArrayGeometry) -> np.ndarray:
    # focusing delays relative to the aperture center, seconds
    fx, fz = geom.tx_focus
    d_el = np.hypot(geom.element_x - fx, fz)
    d_center = np.hypot(fx, fz)
    return (d_el - d_center) / geom.c0


def simulate_channel_data(geom: ArrayGeometry, pulse: Pulse, scatterers, profile: AberrationProfile,
                          t_span: tuple[float, float]) -> ChannelData:
    """Simulate per-element RF for a focused transmit through a phase screen.

    Parameters
    ----------
    geom : ArrayGeometry
    pulse : Pulse
    scatterers : iterable of (x, z, amp)
        Point scatterers; depths must be positive.
    profile : AberrationProfile
        Screen delays, applied on transmit and on receive.
    t_span : (t0, t1)
        Recording window in seconds; must cover every echo's full pulse
        support.

    Returns
    -------
    ChannelData
        rf[e][t] = sum over scatterers k and transmitters tx of
        amp_k * p(t - tau_tx(tx,k) - tau_rx(e,k)) with 1/d spreading per path,
        where tau_tx = d(tx,k)/c0 - d_focus(tx)/c0 + delta_tx and
        tau_rx = d(e,k)/c0 + delta_e.
    """
    scatterers = [(float(x), float(z), float(a)) for (x, z, a) in scatterers]
    if any(z <= 0 for _, z, _ in scatterers):
        raise ValueError("scatterer depths must be > 0")
    if len(profile) != geom.n_elements:
        raise ValueError("profile length must match n_elements")

    t0, t1 = float(t_span[0]), float(t_span[1])
    n = int(np.floor((t1 - t0) * geom.fs)) + 1
    if n < 1:
        raise ValueError("empty t_span")
    rf = np.zeros((geom.n_elements, n))
    if not scatterers:
        return ChannelData(rf, geom.fs, t0)

    ex = geom.element_x
    focus_delay = _tx_delays(geom)
    delta = profile.delays
    half = pulse.duration / 2
    grid_t = t0 + np.arange(n) / geom.fs

    for (sx, sz, amp) in scatterers:
        dist = np.hypot(ex - sx, sz)
        tau_tx = dist / geom.c0 - focus_delay + delta
        tau_rx = dist / geom.c0 + delta
        lo = tau_tx.min() + tau_rx.min() - half
        hi = tau_tx.max() + tau_rx.max() + half
        if lo < t0 or hi > t1:
            raise ValueError(
                f"t_span ({t0:.3e}, {t1:.3e}) too short: echoes span ({lo:.3e}, {hi:.3e})")
        gain = amp / dist
        for j in range(geom.n_elements):  # transmitter
            tau = tau_tx[j] + tau_rx
            a = gain[j] / dist
            i0 = np.searchsorted(grid_t, tau - half)
            i1 = np.searchsorted(grid_t, tau + half, side="right")
            for e in range(geom.n_elements):  # receiver
                sl = slice(i0[e], i1[e])
                rf[e, sl] += a[e] * pulse.waveform(grid_t[sl] - tau[e])
    return ChannelData(rf, geom.fs, t0)


def beamform_das(ch: ChannelData, geom: ArrayGeometry, grid: GridSpec, f_demod: float) -> ComplexImage:
    """Dynamic-receive delay-and-sum with baseband demodulation.

    Nominal delays only (no aberration knowledge), rectangular apodization,
    linear interpolation between RF samples. The summed RF image is mixed
    down by exp(-2i*pi*f_demod*t(x,z)) and low-pass filtered with a moving
    average spanning one two-way carrier period along depth.

    Parameters
    ----------
    ch : ChannelData
    geom : ArrayGeometry
    grid : GridSpec
        Output pixel lattice.
    f_demod : float
        Demodulation frequency in Hz, > 0.
    """
    if f_demod <= 0:
        raise ValueError("f_demod must be > 0")
    xs = grid.x_axis()
    zs = grid.z_axis()
    X, Z = np.meshgrid(xs, zs)
    fx, fz = geom.tx_focus
    # transmit time: planar advance through the focal depth
    t_tx = (np.hypot(fx, fz) + (Z - fz)) / geom.c0

    n = ch.n_samples
    rf_img = np.zeros(grid.shape)
    for e in range(geom.n_elements):
        tau = t_tx + np.hypot(X - geom.element_x[e], Z) / geom.c0
        s = (tau - ch.t0) * ch.fs
        k = np.floor(s).astype(np.int64)
        frac = s - k
        valid = (k >= 0) & (k < n - 1)
        k = np.clip(k, 0, n - 2)
        trace = ch.rf[e]
        rf_img += np.where(valid, (1 - frac) * trace[k] + frac * trace[k + 1], 0.0)

    t_pix = t_tx + np.hypot(X, Z) / geom.c0
    iq = rf_img * np.exp(-2j * np.pi * f_demod * t_pix)
    # one carrier period along depth; exact image-frequency null when integer
    width = max(1, round(geom.c0 / (2 * f_demod) / grid.dz))
    iq = fftconvolve(iq, np.ones((width, 1)) / width, mode="same")
    return ComplexImage(iq, grid.dx, grid.dz, (float(xs[0]), float(zs[0])))


def _psf_grid(geom: ArrayGeometry, patch_shape: tuple[int, int], margin: int) -> GridSpec:
    nz, nx = patch_shape[0] + 2 * margin, patch_shape[1] + 2 * margin
    return GridSpec.centered(nz, nx, presets.DX, presets.DZ, center=geom.tx_focus)


def _span_for_grid(geom: ArrayGeometry, pulse: Pulse, grid: GridSpec,
                   scatterers, profile: AberrationProfile | None = None) -> tuple[float, float]:
    """Recording window covering all echo supports and all pixel sample times."""
    xs = grid.x_axis()
    zs = grid.z_axis()
    ex = geom.element_x
    focus_delay = _tx_delays(geom)
    fx, fz = geom.tx_focus
    d_center = np.hypot(fx, fz)

    # pixel sampling times: t_tx is linear in z; receive distance to the
    # grid rectangle is bounded by the edge projection and the far corner
    gap = np.maximum(np.maximum(xs[0] - ex, ex - xs[-1]), 0.0)
    d_min = np.hypot(gap, zs[0])
    d_max = np.maximum(np.hypot(ex - xs[0], zs[-1]), np.hypot(ex - xs[-1], zs[-1]))
    lo = (d_center + (zs[0] - fz)) / geom.c0 + d_min.min() / geom.c0
    hi = (d_center + (zs[-1] - fz)) / geom.c0 + d_max.max() / geom.c0

    for (sx, sz, _) in scatterers:
        d = np.hypot(ex - sx, sz)
        tau_tx = d / geom.c0 - focus_delay
        tau_rx = d / geom.c0
        lo = min(lo, tau_tx.min() + tau_rx.min())
        hi = max(hi, tau_tx.max() + tau_rx.max())
    pad = pulse.duration + 4 / geom.fs
    if profile is not None and len(profile):
        pad += 2 * float(np.abs(profile.delays).max())
    return (lo - pad, hi + pad)


def simulate_psf(geom: ArrayGeometry, pulse: Pulse, profile: AberrationProfile,
                 grid: GridSpec | None = None,
                 patch_shape: tuple[int, int] = presets.PATCH_SHAPE,
                 margin: int = 10) -> Psf:
    """Simulate the system PSF: one unit scatterer at the transmit focus.

    Channel data for a single unit scatterer at ``geom.tx_focus`` is
    beamformed on ``grid`` (default: a patch-plus-margin grid centered on the
    focus at the default pixel spacings), cropped to ``patch_shape`` around
    the envelope peak, and normalized by :func:`center_psf`. A zero profile
    yields the ideal PSF.
    """
    if grid is None:
        grid = _psf_grid(geom, patch_shape, margin)
    if grid.n_z < patch_shape[0] or grid.n_x < patch_shape[1]:
        raise ValueError("grid smaller than the PSF patch")
    fx, fz = geom.tx_focus
    scatterers = [(fx, fz, 1.0)]
    span = _span_for_grid(geom, pulse, grid, scatterers, profile)
    ch = simulate_channel_data(geom, pulse, scatterers, profile, span)
    img = beamform_das(ch, geom, grid, pulse.f0)

    env = np.abs(img.data)
    iz, ix = np.unravel_index(int(np.argmax(env)), env.shape)
    z0 = min(max(iz - patch_shape[0] // 2, 0), grid.n_z - patch_shape[0])
    x0 = min(max(ix - patch_shape[1] // 2, 0), grid.n_x - patch_shape[1])
    patch = img.data[z0:z0 + patch_shape[0], x0:x0 + patch_shape[1]]
    return center_psf(ComplexImage(patch, grid.dx, grid.dz))


@dataclass(frozen=True)
class PhantomSpec:
    """Cyst-plus-point-targets phantom description.

    extent is (width, height) in meters; the cyst is a disk of radius
    ``cyst_radius`` at ``cyst_center`` whose scatterer amplitudes are scaled
    by ``cyst_amp`` (0 = anechoic). ``point_targets`` is a list of
    (x, z, amplitude) impulses. ``scatterer_density`` is per mm^2.
    """

    extent: tuple[float, float]
    cyst_center: tuple[float, float]
    cyst_radius: float
    cyst_amp: float = 0.0
    point_targets: tuple = ()
    scatterer_density: float = 40.0

    def __post_init__(self):
        if self.cyst_radius <= 0:
            raise ValueError("cyst_radius must be > 0")
        if self.cyst_amp < 0:
            raise ValueError("cyst_amp must be >= 0")
        if self.scatterer_density < 0:
            raise ValueError("scatterer_density must be >= 0")
        if 2 * self.cyst_radius > min(self.extent):
            raise ValueError("cyst does not fit inside the extent")


def make_phantom(spec: PhantomSpec, grid: GridSpec, seed: int):
    """Draw a random scatterer map and its evaluation masks.

    Scatterer count is Poisson(density * area); positions are uniform over
    the grid extent and binned to pixels; amplitudes are standard normal.
    Binned amplitudes inside the cyst disk are scaled by ``cyst_amp`` and
    point targets are added as single-pixel impulses.

    Returns
    -------
    (ScattererMap, RegionMask, RegionMask)
        The map, the cyst disk eroded by 2 pixels, and an equal-pixel-count
        background annulus around the cyst at the same depth.
    """
    xs = grid.x_axis()
    zs = grid.z_axis()
    if grid.n_x * grid.dx < spec.extent[0] - grid.dx / 2 or grid.n_z * grid.dz < spec.extent[1] - grid.dz / 2:
        raise ValueError("grid does not cover the phantom extent")
    cx, cz = spec.cyst_center
    if not (xs[0] <= cx - spec.cyst_radius and cx + spec.cyst_radius <= xs[-1]
            and zs[0] <= cz - spec.cyst_radius and cz + spec.cyst_radius <= zs[-1]):
        raise ValueError("cyst must lie fully inside the grid extent")

    rng = np.random.default_rng(seed)
    width = grid.n_x * grid.dx
    height = grid.n_z * grid.dz
    area_mm2 = width * height * 1e6
    count = int(rng.poisson(spec.scatterer_density * area_mm2))
    px = xs[0] + rng.uniform(0, width, size=count) - grid.dx / 2
    pz = zs[0] + rng.uniform(0, height, size=count) - grid.dz / 2
    amp = rng.standard_normal(count)

    amps = np.zeros(grid.shape)
    ix = np.clip(np.round((px - xs[0]) / grid.dx).astype(np.int64), 0, grid.n_x - 1)
    iz = np.clip(np.round((pz - zs[0]) / grid.dz).astype(np.int64), 0, grid.n_z - 1)
    np.add.at(amps, (iz, ix), amp)

    X, Z = np.meshgrid(xs, zs)
    dist = np.hypot(X - cx, Z - cz)
    inside = dist <= spec.cyst_radius
    amps[inside] *= spec.cyst_amp
    for (tx, tz, ta) in spec.point_targets:
        j = int(np.clip(np.round((tx - xs[0]) / grid.dx), 0, grid.n_x - 1))
        i = int(np.clip(np.round((tz - zs[0]) / grid.dz), 0, grid.n_z - 1))
        amps[i, j] += ta

    cyst_bits = binary_erosion(inside, iterations=2)
    n_in = int(cyst_bits.sum())
    # nearest outside pixels beyond a 2-pixel guard ring, equal count
    guard = dist > spec.cyst_radius + 2 * max(grid.dx, grid.dz)
    order = np.argsort(dist[guard], kind="stable")
    bg_bits = np.zeros(grid.shape, dtype=bool)
    idx = np.flatnonzero(guard)[order[:n_in]]
    bg_bits.flat[idx] = True

    return (
        ScattererMap(amps, grid.dx, grid.dz, grid.origin),
        RegionMask(cyst_bits, "cyst"),
        RegionMask(bg_bits, "background"),
    )


def synth_speckle(s: ScattererMap, psf: Psf) -> ComplexImage:
    """Convolve a scatterer map with a PSF patch (same-size output).

    2D linear convolution with zero-padded boundaries, computed in the
    frequency domain; the output keeps the map's grid.
    """
    kz, kx = psf.shape
    nz, nx = s.shape
    if kz > nz or kx > nx:
        raise ValueError("psf patch larger than the scatterer map")
    data = fftconvolve(s.amps, psf.data, mode="same")
    return ComplexImage(data, s.dx, s.dz, s.origin)
