"""Squeezed light from two-tone driven optomechanical cavities.

The RWA models live in :mod:`optosqueeze.model` and are solved in
:mod:`optosqueeze.linres`; :mod:`optosqueeze.floquet` restores the
counter-rotating terms.  Closed-form reference results are collected in
:mod:`optosqueeze.oracle`.
"""
__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
from .model import (  # noqa: E402
    DriveConfig,
    LtiModel,
    MeasurementSignal,
    PhysParams,
    Scheme,
    build_model,
    drives_from_squeezing,
    matched_drives,
)
from .linres import SHOT_NOISE, Spectra, SpectrumPoint, spectra, spectrum_point  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "DriveConfig",
    "LtiModel",
    "MeasurementSignal",
    "PhysParams",
    "Scheme",
    "build_model",
    "drives_from_squeezing",
    "matched_drives",
    "SHOT_NOISE",
    "Spectra",
    "SpectrumPoint",
    "spectra",
    "spectrum_point",
]
