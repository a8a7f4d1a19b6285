"""Region-based image-quality metrics: CR, CNR (dB and linear), gCNR.

All three operate on the linear detected envelope over two region masks.
Degenerate inputs produce +/-inf sentinels rather than exceptions; pass
``return_flag=True`` to receive an explicit degeneracy flag alongside the
value.
"""

from __future__ import annotations

import numpy as np

from . import presets
from .types import EnvelopeImage, RegionMask

__all__ = ["contrast_ratio", "cnr", "cnr_linear", "gcnr"]


def _samples(env, mask: RegionMask) -> np.ndarray:
    data = env.env if isinstance(env, EnvelopeImage) else np.asarray(env)
    if mask.shape != data.shape:
        raise ValueError("mask shape must match the image")
    if mask.count == 0:
        raise ValueError(f"empty region mask {mask.label!r}")
    return data[mask.bits]


def contrast_ratio(env, inside: RegionMask, outside: RegionMask, return_flag: bool = False):
    """Contrast ratio |20*log10(mean_out / mean_in)| in dB.

    A zero mean on either side yields a +inf sentinel (flagged), not an error.
    """
    mu_in = float(_samples(env, inside).mean())
    mu_out = float(_samples(env, outside).mean())
    if mu_in == 0 or mu_out == 0:
        value, degenerate = np.inf, True
    else:
        value, degenerate = abs(20 * np.log10(mu_out / mu_in)), False
    return (value, degenerate) if return_flag else value


def cnr_linear(env, inside: RegionMask, outside: RegionMask, return_flag: bool = False):
    """|mean_out - mean_in| / sqrt(var_out + var_in) on the linear envelope."""
    a = _samples(env, inside)
    b = _samples(env, outside)
    spread = np.sqrt(a.var() + b.var())
    if spread == 0:
        value, degenerate = np.inf, True
    else:
        value, degenerate = float(abs(b.mean() - a.mean()) / spread), False
    return (value, degenerate) if return_flag else value


def cnr(env, inside: RegionMask, outside: RegionMask, return_flag: bool = False):
    """CNR in dB: 20*log10 of the linear definition.

    Zero joint variance gives +inf; equal means give -inf (both flagged).
    """
    lin, degenerate = cnr_linear(env, inside, outside, return_flag=True)
    if degenerate:
        value = np.inf
    elif lin == 0:
        value, degenerate = -np.inf, True
    else:
        value = float(20 * np.log10(lin))
    return (value, degenerate) if return_flag else value


def gcnr(env, inside: RegionMask, outside: RegionMask, n_bins: int = presets.GCNR_BINS) -> float:
    """Generalized CNR: 1 minus the histogram overlap of the two regions.

    Histograms share the range [0, max over both regions] with ``n_bins``
    equal-width bins, each normalized to sum 1. Identical distributions give
    0, disjoint supports give 1.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    a = _samples(env, inside)
    b = _samples(env, outside)
    top = max(float(a.max()), float(b.max()))
    if top == 0:  # both regions identically zero: full overlap
        return 0.0
    pa, _ = np.histogram(a, bins=n_bins, range=(0.0, top))
    pb, _ = np.histogram(b, bins=n_bins, range=(0.0, top))
    # min(pa/na, pb/nb) summed in integer arithmetic: exact 0/1 endpoints
    cross = np.minimum(pa.astype(np.int64) * len(b), pb.astype(np.int64) * len(a))
    return float(1.0 - int(cross.sum()) / (len(a) * len(b)))
