"""Dispersive measurement rate relative to a bare linear cavity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import floquet, linres
from .model import (
    DriveConfig,
    MeasurementSignal,
    PhysParams,
    Scheme,
    build_measurement,
    linear_cavity,
    matched_drives,
)

__all__ = ["Enhancement", "measurement_drives", "linear_cavity_rate", "enhancement"]


@dataclass(frozen=True)
class Enhancement:
    ratio: float
    chi_meas: float
    s_ii: float
    converged: bool


def measurement_drives(params: PhysParams, c: float, c0: float, a_zero: float = 1.0) -> DriveConfig:
    """Matched two-tone drive at cooperativity ``c`` plus a resonant tone at ``c0``."""
    if c0 < 0:
        raise ValueError("c0 must be non-negative")
    g_zero = math.sqrt(c0 * params.kappa_total * params.gamma_m / 4.0)
    return matched_drives(params, c, Scheme.MEASUREMENT, g_zero=g_zero, a_zero=a_zero)


def linear_cavity_rate(params: PhysParams, a_zero: float = 1.0) -> float:
    """Measurement rate of the same cavity and read-out tone without mechanics."""
    model = linear_cavity(params, a_zero)
    force = np.zeros(4)
    force[0] = -math.sqrt(2.0) * a_zero
    chi = linres.mean_response(model, force)
    return linres.measurement_rate(chi, linres.symmetrized_current_spectrum(model))


def enhancement(params: PhysParams, c: float, c0: float, *, solver: str = "rwa",
                n_harm: int = floquet.DEFAULT_HARMONICS, strict: bool = True) -> Enhancement:
    """``Gamma_meas / Gamma_meas^lc`` at zero frequency.

    With ``solver="floquet"`` both the slope and the current noise include
    the counter-rotating terms of all three tones.
    """
    drives = measurement_drives(params, c, c0)
    model, force = build_measurement(params, drives, MeasurementSignal(1.0))
    reference = linear_cavity_rate(params, drives.a_zero)
    if solver == "rwa":
        chi = linres.mean_response(model, force)
        s_ii = linres.symmetrized_current_spectrum(model)
        converged = True
    elif solver == "floquet":
        fm = floquet.lift(model, n_harm=n_harm)
        chi = floquet.floquet_mean_response(fm)
        res = floquet.floquet_spectra(fm, [0.0], strict=strict)
        s_ii = 2 * params.kappa_out * float(res.spectra.s_u1[0])
        converged = res.converged
    else:
        raise ValueError(f"unknown solver {solver!r}")
    rate = linres.measurement_rate(chi, s_ii)
    return Enhancement(rate / reference, chi, s_ii, converged)
