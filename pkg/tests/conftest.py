import math

import numpy as np
import pytest

from optosqueeze.model import DriveConfig, PhysParams, Scheme, matched_drives


@pytest.fixture
def good_cavity():
    """Good-cavity parameters used throughout the squeezing checks (kappa = 1)."""
    return PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)


@pytest.fixture
def matched(good_cavity):
    return matched_drives(good_cavity, 1e5)


def ps_drive(g):
    return DriveConfig(g_minus=g, scheme=Scheme.PONDEROMOTIVE)


def rel(a, b):
    return abs(a - b) / abs(b)


def wrap_angle(phi):
    """Fold into (-pi/2, pi/2]."""
    phi = math.fmod(phi, math.pi)
    if phi <= -math.pi / 2:
        phi += math.pi
    elif phi > math.pi / 2:
        phi -= math.pi
    return phi


def scan_min(s1, s2, s12, n=200001):
    phi = np.linspace(-np.pi / 2, np.pi / 2, n)
    vals = s1 * np.cos(phi) ** 2 + s2 * np.sin(phi) ** 2 + s12 * np.sin(2 * phi)
    return float(vals.min())
