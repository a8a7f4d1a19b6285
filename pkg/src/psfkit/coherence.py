"""Filter-derived coherence index and multiplicative weighting.

At each pixel, the point-wise product P between the kernel and the image
neighborhood (the array summed by convolution, before summation) is Fourier
transformed over the kernel support; the coherence index is the fraction of
its energy in the low-frequency bins. Mainlobe signal concentrates that
product at DC, sidelobe and clutter signal spread it, so the index separates
the two without channel data.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from . import presets
from .types import CoherenceMap, ComplexImage, EnvelopeImage, FilterKernel

__all__ = ["coherence_map", "apply_weighting"]


def _modulated(taps: np.ndarray, u: int, v: int) -> np.ndarray:
    kz, kx = taps.shape
    row = np.exp(-2j * np.pi * u * np.arange(kz) / kz)[:, None]
    col = np.exp(-2j * np.pi * v * np.arange(kx) / kx)[None, :]
    return taps * row * col


def coherence_map(img, k: FilterKernel, m0: int = presets.M0,
                  axes: str = presets.AXES) -> CoherenceMap:
    """Per-pixel low-frequency energy fraction of the data-kernel product.

    Parameters
    ----------
    img : ComplexImage or ndarray
    k : FilterKernel
        Sliding kernel; must fit inside the image.
    m0 : int
        Cutoff: bins with |u| <= m0 and |v| <= m0 count as low-frequency
        (0 keeps DC only). Must not exceed the kernel half-dims.
    axes : "lateral" or "both"
        Spectrum dimensionality. "lateral" (default) takes 1D DFTs along the
        lateral axis, one per kernel row, and pools the energies; the pooled
        index stays close to 1 across speckle and drops in clutter, which is
        what makes it usable as a weight. "both" takes the full 2D DFT of the
        product patch; its low band is far more selective (index well below 1
        even on the mainlobe), useful for analysis rather than weighting.

    Returns
    -------
    CoherenceMap
        w in [0, 1]; w = 0 where the product patch has no energy. Borders use
        zero-padded patches, consistent with apply_filter.

    Notes
    -----
    Each low bin equals one convolution of the image with a frequency
    modulated copy of the kernel, so the map costs (2*m0+1)^2 FFT
    convolutions; the total energy comes from Parseval as
    N * conv(|img|^2, |k|^2).
    """
    data = img.data if isinstance(img, ComplexImage) else np.asarray(img, dtype=np.complex128)
    taps = k.taps
    kz, kx = taps.shape
    if kz > data.shape[0] or kx > data.shape[1]:
        raise ValueError("kernel larger than the image")
    if m0 < 0:
        raise ValueError("m0 must be >= 0")
    if axes not in ("both", "lateral"):
        raise ValueError("axes must be 'both' or 'lateral'")
    half_z, half_x = (kz - 1) // 2, (kx - 1) // 2
    limit = min(half_z, half_x) if axes == "both" else half_x
    if m0 > limit:
        raise ValueError(f"m0={m0} exceeds the kernel half-dims for axes={axes}")

    bins = range(-m0, m0 + 1)
    num = np.zeros(data.shape)
    if axes == "both":
        n_total = kz * kx
        for u in bins:
            for v in bins:
                q = fftconvolve(data, _modulated(taps, u, v), mode="same")
                num += np.abs(q) ** 2
    else:
        n_total = kx
        for i in range(kz):
            single = np.zeros_like(taps)
            single[i] = taps[i]
            for v in bins:
                q = fftconvolve(data, _modulated(single, 0, v), mode="same")
                num += np.abs(q) ** 2

    product_energy = fftconvolve(np.abs(data) ** 2, np.abs(taps) ** 2, mode="same")
    denom = n_total * np.maximum(product_energy, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(denom > 0, num / denom, 0.0)
    return CoherenceMap(np.clip(w, 0.0, 1.0))


def apply_weighting(img, w: CoherenceMap, p: float = presets.P_EXPONENT):
    """Scale an image by the coherence index raised to ``p``.

    Complex images keep their phase (magnitudes scale); envelope images scale
    directly. p = 0 is the identity.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if w.shape != img.shape:
        raise ValueError("weight map shape must match the image")
    gain = w.w ** p
    if isinstance(img, ComplexImage):
        return img.with_data(img.data * gain)
    if isinstance(img, EnvelopeImage):
        return EnvelopeImage(img.env * gain, img.dx, img.dz, img.origin)
    return np.asarray(img) * gain
