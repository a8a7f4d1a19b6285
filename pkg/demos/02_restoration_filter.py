"""Designing the restoration kernel and checking how well it works.

Builds the L2-optimal kernel mapping the moderate-aberration PSF toward the
ideal one, sweeps the ridge weight eps, and shows the fidelity/noise tradeoff
through the restoration residual.
"""

from pathlib import Path

import numpy as np

import psfkit as pk
from psfkit import presets

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

geom = presets.default_geometry()
pulse = presets.default_pulse()
ideal = pk.simulate_psf(geom, pulse, pk.AberrationProfile.zero(geom.n_elements))
rms, corr = presets.ABERRATOR_PRESETS["moderate"]
profile = pk.make_aberration_profile(geom.n_elements, rms, corr, presets.DEFAULT_SEED)
aberrated = pk.simulate_psf(geom, pulse, profile)

print("residual = ||psf_aberrated * K - psf_ideal|| / ||psf_ideal||")
print(f"{'eps':>8s} {'residual':>9s} {'|K| max':>8s}")
for eps in (1e-3, 3e-3, 1e-2, 3e-2, 1e-1):
    k = pk.design_filter(aberrated, ideal, eps=eps)
    res = pk.restoration_residual(aberrated, ideal, k)
    print(f"{eps:8.0e} {res:9.3f} {np.abs(k.taps).max():8.2f}")

kernel = pk.design_filter(aberrated, ideal)
identity = np.zeros(presets.KERNEL_SHAPE, complex)
identity[tuple((n - 1) // 2 for n in identity.shape)] = 1.0
print(f"\ndoing nothing instead (identity kernel): residual "
      f"{pk.restoration_residual(aberrated, ideal, pk.FilterKernel.from_taps(identity)):.3f}")

restored = pk.apply_filter(pk.ComplexImage(aberrated.data, presets.DX, presets.DZ), kernel)
pk.write_image(pk.log_compress(np.abs(aberrated.data), 50), OUT / "point_aberrated.pgm")
pk.write_image(pk.log_compress(np.abs(restored.data), 50), OUT / "point_restored.pgm")
pk.write_array(OUT / "kernel.psfk", kernel)
print(f"wrote point-target renders and kernel.psfk to {OUT}/")
