"""PSF restoration filtering: ridge-regularized L2 inverse design and application.

The kernel K minimizes ||psf_a * K - psf_i||^2 + eps*max|Ha|^2 * ||K||^2 on a
zero-padded grid, solved in closed form in the frequency domain, then
re-centered, cropped to a finite support, and edge-tapered. Convolution is
true convolution (kernel flipped), anchored at the kernel center, so the
associativity the speckle model relies on holds.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from . import presets
from .types import ComplexImage, FilterKernel, Psf

__all__ = ["design_filter", "apply_filter", "restoration_residual", "taper_window"]


def _patch_of(psf) -> np.ndarray:
    if isinstance(psf, Psf):
        return psf.data
    return np.asarray(psf, dtype=np.complex128)


def taper_window(shape: tuple[int, int], taper: int) -> np.ndarray:
    """Separable raised-cosine ramp over ``taper`` samples at each edge."""
    wins = []
    for n in shape:
        w = np.ones(n)
        for i in range(min(taper, n // 2)):
            v = 0.5 * (1 - np.cos(np.pi * (i + 1) / (taper + 1)))
            w[i] = v
            w[n - 1 - i] = v
        wins.append(w)
    return np.outer(wins[0], wins[1])


def design_filter(psf_a, psf_i, eps: float = presets.EPS,
                  kernel_shape: tuple[int, int] = presets.KERNEL_SHAPE,
                  taper: int = 2) -> FilterKernel:
    """Design the restoration kernel mapping psf_a toward psf_i.

    Parameters
    ----------
    psf_a, psf_i : Psf or ndarray
        Aberrated and ideal PSF patches, same shape.
    eps : float
        Ridge weight, > 0; the regularizer is eps * max|Ha|^2 so eps is
        unit-free.
    kernel_shape : (int, int)
        Odd output dims (axial, lateral); must not exceed the padded design
        grid (psf + kernel - 1 per axis).
    taper : int
        Raised-cosine ramp width at the crop boundary (0 disables).

    Returns
    -------
    FilterKernel
        Khat = Hi * conj(Ha) / (|Ha|^2 + eps*max|Ha|^2) on the padded grid,
        inverse-transformed, circularly re-centered, cropped, tapered.
    """
    pa = _patch_of(psf_a)
    pi_ = _patch_of(psf_i)
    if pa.shape != pi_.shape:
        raise ValueError("psf patches must share a shape")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if not pa.any():
        raise ValueError("aberrated psf is identically zero")
    kz, kx = kernel_shape
    if kz % 2 == 0 or kx % 2 == 0:
        raise ValueError("kernel dims must be odd")
    if kz < 1 or kx < 1:
        raise ValueError("kernel dims must be >= 1")

    nz = pa.shape[0] + kz - 1
    nx = pa.shape[1] + kx - 1
    ha = np.fft.fft2(pa, s=(nz, nx))
    hi = np.fft.fft2(pi_, s=(nz, nx))
    power = np.abs(ha) ** 2
    g = np.fft.ifft2(hi * np.conj(ha) / (power + eps * power.max()))

    cz, cx = (nz - 1) // 2, (nx - 1) // 2
    g = np.roll(g, (cz, cx), axis=(0, 1))
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    taps = g[cz - az: cz + az + 1, cx - ax: cx + ax + 1]
    if taper > 0:
        taps = taps * taper_window((kz, kx), taper)
    return FilterKernel(taps, (az, ax))


def apply_filter(img, k: FilterKernel):
    """Convolve an image with a kernel: same-size, zero-padded, center anchor.

    Accepts a ComplexImage (grid preserved) or a bare 2D array.
    """
    taps = k.taps if isinstance(k, FilterKernel) else np.asarray(k)
    data = img.data if isinstance(img, ComplexImage) else np.asarray(img)
    if taps.shape[0] > data.shape[0] or taps.shape[1] > data.shape[1]:
        raise ValueError("kernel larger than the image")
    out = fftconvolve(data, taps, mode="same")
    if isinstance(img, ComplexImage):
        return img.with_data(out)
    return out


def restoration_residual(psf_a, psf_i, k: FilterKernel) -> float:
    """Relative L2 misfit ||psf_a * k - psf_i|| / ||psf_i|| of a kernel.

    A perfect restoration gives 0; the zero kernel gives exactly 1.
    """
    pa = _patch_of(psf_a)
    pi_ = _patch_of(psf_i)
    if pa.shape != pi_.shape:
        raise ValueError("psf patches must share a shape")
    denom = np.linalg.norm(pi_)
    if denom == 0:
        raise ValueError("ideal psf is identically zero")
    restored = apply_filter(pa, k)
    return float(np.linalg.norm(restored - pi_) / denom)
