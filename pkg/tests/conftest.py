import numpy as np
import pytest

import psfkit as pk


@pytest.fixture(scope="session")
def geom():
    return pk.presets.default_geometry()


@pytest.fixture(scope="session")
def pulse():
    return pk.presets.default_pulse()


@pytest.fixture(scope="session")
def psf_ideal(geom, pulse):
    return pk.simulate_psf(geom, pulse, pk.AberrationProfile.zero(geom.n_elements))


@pytest.fixture(scope="session")
def psf_bank(geom, pulse):
    """Memoized aberrated PSFs keyed by (preset, seed); simulation is the
    expensive step of the suite."""
    cache = {}

    def get(preset="moderate", seed=7):
        key = (preset, seed)
        if key not in cache:
            rms, corr = pk.presets.ABERRATOR_PRESETS[preset]
            prof = pk.make_aberration_profile(64, rms, corr, seed)
            cache[key] = pk.simulate_psf(
                pk.presets.default_geometry(), pk.presets.default_pulse(), prof)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def kernel7(psf_bank, psf_ideal):
    return pk.design_filter(psf_bank("moderate", 7), psf_ideal)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
