"""Point-spread-function restoration toolkit for phase-aberrated ultrasound.

Simulates focused linear-array imaging through a near-field phase screen,
designs a regularized least-squares kernel that maps the aberrated PSF back
toward the ideal one, derives a per-pixel coherence weighting from the same
kernel, and scores the results with standard contrast metrics.
"""

from . import presets
from .coherence import apply_weighting, coherence_map
from .metrics import cnr, cnr_linear, contrast_ratio, gcnr
from .psfk import (
    BadMagicError,
    DimensionError,
    PsfkError,
    TruncatedError,
    VersionError,
    read_array,
    write_array,
)
from .render import envelope, lateral_profile, log_compress, read_pgm, write_image
from .restore import apply_filter, design_filter, restoration_residual, taper_window
from .simulate import (
    PhantomSpec,
    beamform_das,
    make_aberration_profile,
    make_phantom,
    simulate_channel_data,
    simulate_psf,
    synth_speckle,
)
from .types import (
    AberrationProfile,
    ArrayGeometry,
    ChannelData,
    CoherenceMap,
    ComplexImage,
    EnvelopeImage,
    FilterKernel,
    GridSpec,
    Psf,
    Pulse,
    RegionMask,
    ScattererMap,
    center_psf,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "presets",
    # types
    "ArrayGeometry", "Pulse", "AberrationProfile", "GridSpec", "ComplexImage",
    "Psf", "FilterKernel", "ScattererMap", "RegionMask", "CoherenceMap",
    "EnvelopeImage", "ChannelData", "center_psf",
    # container format
    "write_array", "read_array", "PsfkError", "BadMagicError", "VersionError",
    "TruncatedError", "DimensionError",
    # simulation
    "make_aberration_profile", "simulate_channel_data", "beamform_das",
    "simulate_psf", "PhantomSpec", "make_phantom", "synth_speckle",
    # restoration
    "design_filter", "apply_filter", "restoration_residual", "taper_window",
    # coherence weighting
    "coherence_map", "apply_weighting",
    # metrics
    "contrast_ratio", "cnr", "cnr_linear", "gcnr",
    # rendering
    "envelope", "log_compress", "write_image", "read_pgm", "lateral_profile",
]
