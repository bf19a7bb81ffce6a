"""Closed-form results used as independent checks of the numerical solvers.

Nothing in here calls into :mod:`linres` or :mod:`floquet`.  Asymptotic
formulas return an :class:`Approx` carrying a regime flag; outside the stated
regime the value is still computed but ``in_regime`` is False.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

__all__ = [
    "Approx",
    "StrongCoupling",
    "chi_m",
    "self_energy",
    "chi_cav",
    "chi_cav_linear",
    "s_u1_resonance",
    "ps_asymptote_resonance",
    "ps_cmin",
    "diss_cmin_bound",
    "strong_coupling",
    "lossy_resonance",
    "phase_noise_resonance",
    "bad_cavity_floor",
    "measurement_enhancement",
    "matched_exp_minus_2r",
    "threshold_cooperativity_exact",
]


class Approx(NamedTuple):
    value: float
    in_regime: bool
    regime: str


class StrongCoupling(NamedTuple):
    condition: bool
    omega_plus: Optional[float]
    s_min: Optional[float]


def chi_m(omega, omega_m, gamma_m):
    """Mechanical susceptibility ``1/(Omega^2 - w^2 - i w Gamma_M)``."""
    return 1.0 / (omega_m**2 - omega**2 - 1j * omega * gamma_m)


def self_energy(omega, gamma_m, g_minus, g_plus):
    """Cavity self-energy from the effective mechanical bath.

    Returns ``(Re Sigma, kappa_tilde[w])`` with
    ``Sigma = -i (G-^2 - G+^2)/(-i w + Gamma_M/2) = Re Sigma - i kappa_tilde/2``.
    """
    g2 = (g_minus - g_plus) * (g_minus + g_plus)
    sigma = -1j * g2 / (-1j * omega + gamma_m / 2)
    return sigma.real, -2.0 * sigma.imag


def chi_cav(omega, kappa, gamma_m, g_minus, g_plus):
    """Dressed cavity susceptibility ``1/(-i w + kappa/2 + i Sigma)``."""
    g2 = (g_minus - g_plus) * (g_minus + g_plus)
    sigma = -1j * g2 / (-1j * omega + gamma_m / 2)
    return 1.0 / (-1j * omega + kappa / 2 + 1j * sigma)


def chi_cav_linear(omega, kappa):
    return 1.0 / (-1j * omega + kappa / 2)


def s_u1_resonance(kappa, kappa_tilde, n_th, r):
    """Amplitude-quadrature noise at resonance over shot noise, RWA.

    ``(4 k kt (1+2n) e^{-2r} + (k - kt)^2) / (k + kt)^2``.
    """
    if kappa + kappa_tilde == 0:
        raise ZeroDivisionError("kappa + kappa_tilde must be positive")
    e = math.exp(-2.0 * r)
    return (4 * kappa * kappa_tilde * (1 + 2 * n_th) * e + (kappa - kappa_tilde) ** 2) / (
        kappa + kappa_tilde
    ) ** 2


def matched_exp_minus_2r(c):
    """``e^{-2r}`` once the blue drive is impedance matched at cooperativity ``c``."""
    if c < 1:
        raise ValueError("impedance matching needs c >= 1")
    x = math.sqrt(1.0 - 1.0 / c)
    return (1 - x) / (1 + x)


def threshold_cooperativity_exact(n_th, target_ratio):
    """Cooperativity at which the matched resonance noise equals ``target_ratio``.

    Inverts ``(1+2n) (1-x)/(1+x) = target`` with ``x = sqrt(1 - 1/C)``.
    """
    e = target_ratio / (1 + 2 * n_th)
    if not 0 < e <= 1:
        raise ValueError("target not reachable by a matched dissipative drive")
    x = (1 - e) / (1 + e)
    return 1.0 / (1.0 - x * x)


def ps_asymptote_resonance(g, kappa, omega_m) -> Approx:
    """Optimal ponderomotive noise at resonance, good-cavity small-coupling limit."""
    dev = 16 * g * g / (kappa * omega_m)
    ok = kappa <= 0.1 * omega_m and dev <= 0.1
    return Approx(1 - dev, ok, "kappa/Omega <= 0.1 and 16 G^2/(kappa Omega) <= 0.1")


def diss_cmin_bound(n_th):
    """Approximate 3 dB cooperativity of the dissipative scheme, ``(1 + 2 n_th)/2``."""
    return (1 + 2 * n_th) / 2


def ps_cmin(omega_m, gamma_m, n_th) -> Approx:
    """Good-cavity 3 dB cooperativity bound for ponderomotive squeezing.

    ``(C_diss + Omega/(sqrt(2) Gamma_M)) / 4`` with ``C_diss = (1+2n)/2``.
    """
    if gamma_m <= 0:
        raise ValueError("gamma_m must be positive")
    value = (diss_cmin_bound(n_th) + omega_m / (math.sqrt(2) * gamma_m)) / 4
    return Approx(value, gamma_m < omega_m, "Gamma_M << Omega (lower bound)")


def strong_coupling(kappa, gamma_m, g) -> StrongCoupling:
    """Normal-mode splitting of the squeezing spectrum.

    ``g`` is the effective coupling ``sqrt(G-^2 - G+^2)``.  Outside the strong
    coupling regime the frequency and minimum are ``None``.
    """
    disc = 8 * g * g - kappa**2 - gamma_m**2
    if disc < 0:
        return StrongCoupling(False, None, None)
    w = math.sqrt(disc) / (2 * math.sqrt(2))
    num = (gamma_m - kappa) ** 2 * ((gamma_m + kappa) ** 2 - 16 * g * g)
    den = (gamma_m + kappa) ** 2 * ((gamma_m - kappa) ** 2 - 16 * g * g)
    if den == 0:
        return StrongCoupling(True, w, None)
    s = num / den
    if not 0 <= s <= 1:
        return StrongCoupling(False, None, None)
    return StrongCoupling(True, w, s)


def lossy_resonance(kappa_o, kappa_i, n_th, r):
    """Matched resonance noise with an unobserved loss port."""
    kt = kappa_o + kappa_i
    if kt == 0:
        raise ZeroDivisionError("kappa_tot must be positive")
    return kappa_i / kt + kappa_o / kt * (1 + 2 * n_th) * math.exp(-2.0 * r)


def phase_noise_resonance(n_th, r, gamma_m, gamma_l, g0):
    """Matched resonance noise with white laser frequency noise of linewidth ``gamma_l``."""
    if gamma_l > 0 and g0 == 0:
        raise ZeroDivisionError("g0 must be non-zero when gamma_l > 0")
    extra = gamma_m * gamma_l / g0**2 if gamma_l > 0 else 0.0
    return (1 + 2 * n_th + extra) * math.exp(-2.0 * r)


def bad_cavity_floor(kappa, omega_m) -> Approx:
    """Large-cooperativity limit of the matched resonance noise, ``kappa^2/(32 Omega^2)``."""
    return Approx(kappa**2 / (32 * omega_m**2), kappa <= 0.1 * omega_m, "kappa/Omega <= 0.1")


def measurement_enhancement(n_th, r=None, c=None):
    """Dispersive measurement-rate gain over a bare linear cavity.

    Give exactly one of ``r`` (exact form ``e^{2r}/(4(1+2n))``) or ``c``
    (matched drive at cooperativity ``c``).  Returns ``(exact, Approx)``
    where the approximation is ``C/(1+2n)``.
    """
    if (r is None) == (c is None):
        raise ValueError("give exactly one of r or c")
    if r is None:
        e2r = 1.0 / matched_exp_minus_2r(c)
        # C from r under matching: cosh^2 r = C
    else:
        e2r = math.exp(2.0 * r)
        c = math.cosh(r) ** 2
    exact = e2r / (4 * (1 + 2 * n_th))
    return exact, Approx(c / (1 + 2 * n_th), c >= 10, "C >> 1")
