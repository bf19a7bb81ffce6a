"""Frequency-domain response of time-invariant Langevin models.

Fourier convention: ``x[w] = int dt exp(i w t) x(t)``, so the equations of
motion become ``(-i w - drift) x[w] = in_map xi[w]``.  With white inputs,
``<xi_j[w] xi_k[w']> = 2 pi N_jk delta(w + w')`` and the stationary
(non-symmetrized) spectrum of outputs ``A``, ``B`` is

    S_AB[w] = sum_jk T^A_j[w] N_jk T^B_k[-w].

All drifts are real in the quadrature basis, hence ``T[-w] = conj(T[w])``.
Frequencies are measured from the cavity resonance (rotating frame).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .kernels import SingularSystemError
from .model import LtiModel, Stability, classify_eigenvalues, EPS_STAB

__all__ = [
    "SHOT_NOISE",
    "TransferRow",
    "SpectrumPoint",
    "Spectra",
    "state_transfer",
    "transfer",
    "transfer_matrix",
    "spectrum_point",
    "spectra",
    "optimal_quadrature",
    "quadrature_spectrum",
    "effective_occupancy",
    "mean_response",
    "measurement_rate",
    "symmetrized_current_spectrum",
    "SingularSystemError",
]

SHOT_NOISE = 0.5
OUTPUTS = ("U1_out", "U2_out")
# s_u12 below this fraction of the diagonal counts as zero (n_eff defined)
_DECOUPLED_RTOL = 1e-12


@dataclass(frozen=True)
class TransferRow:
    """Response of one output quadrature to every input channel at ``omega``."""

    omega: float
    quadrature: str
    coeffs: np.ndarray
    channels: tuple

    def coeff(self, channel: str) -> complex:
        return complex(self.coeffs[self.channels.index(channel)])


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    s_u1: float
    s_u2: float
    s_u12: float
    s_opt: float
    phi_opt: float
    n_eff: Optional[float]

    def as_row(self) -> dict:
        return {
            "omega": self.omega,
            "s_u1": self.s_u1,
            "s_u2": self.s_u2,
            "s_u12": self.s_u12,
            "s_opt": self.s_opt,
            "phi_opt": self.phi_opt,
            "n_eff": self.n_eff,
        }

    def violations(self, rtol: float = 1e-9) -> list:
        """Broken record invariants (empty when the point is physical)."""
        out = []
        vals = (self.s_u1, self.s_u2, self.s_u12, self.s_opt, self.phi_opt)
        if not all(math.isfinite(v) for v in vals):
            out.append("non-finite entry")
            return out
        scale = max(abs(self.s_u1), abs(self.s_u2), 1e-300)
        if self.s_u1 < -rtol * scale or self.s_u2 < -rtol * scale:
            out.append("negative quadrature spectrum")
        if self.s_opt > min(self.s_u1, self.s_u2) + rtol * scale:
            out.append("s_opt exceeds min(s_u1, s_u2)")
        if not (-math.pi / 2 < self.phi_opt <= math.pi / 2):
            out.append("phi_opt outside (-pi/2, pi/2]")
        if self.n_eff is not None and self.n_eff < -rtol * (1 + abs(self.n_eff)):
            out.append("negative n_eff")
        return out


@dataclass(frozen=True)
class Spectra:
    """Vectorized counterpart of a list of :class:`SpectrumPoint`."""

    omega: np.ndarray
    s_u1: np.ndarray
    s_u2: np.ndarray
    s_u12: np.ndarray
    s_opt: np.ndarray
    phi_opt: np.ndarray
    n_eff: np.ndarray  # NaN where undefined

    def __len__(self):
        return self.omega.size

    def point(self, i: int) -> SpectrumPoint:
        n = self.n_eff[i]
        return SpectrumPoint(
            float(self.omega[i]),
            float(self.s_u1[i]),
            float(self.s_u2[i]),
            float(self.s_u12[i]),
            float(self.s_opt[i]),
            float(self.phi_opt[i]),
            None if math.isnan(n) else float(n),
        )

    def points(self) -> list:
        return [self.point(i) for i in range(len(self))]


# -- response ----------------------------------------------------------------


def _check_poles(model: LtiModel, omegas: np.ndarray):
    eigs = np.linalg.eigvals(model.drift)
    status = classify_eigenvalues(eigs)
    if status is Stability.UNSTABLE:
        raise SingularSystemError(
            f"unstable {model.scheme.value} model (g_plus={model.drives.g_plus!r}, "
            f"g_minus={model.drives.g_minus!r}): no stationary spectrum"
        )
    if status is Stability.MARGINAL:
        for lam in eigs[np.abs(eigs.real) <= EPS_STAB]:
            hit = np.abs(omegas + lam.imag) <= max(EPS_STAB, 1e-12 * abs(lam))
            if np.any(hit):
                w = float(omegas[np.flatnonzero(hit)[0]])
                raise SingularSystemError(f"marginal pole on the real axis at omega={w!r}")


def state_transfer(model: LtiModel, omegas) -> np.ndarray:
    """``(-i w - drift)^{-1} in_map``, shape ``(len(omegas), n_states, n_channels)``."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(w)):
        raise ValueError("frequencies must be finite")
    _check_poles(model, w)
    return kernels.lti_response(model.drift, model.in_map, w)


def transfer_matrix(model: LtiModel, omegas) -> np.ndarray:
    """Output transfer coefficients, shape ``(len(omegas), 2, n_channels)``.

    Row 0 is ``U1_out``, row 1 is ``U2_out``; the prompt reflection
    (``out_feed``) is included.
    """
    resp = state_transfer(model, omegas)
    return np.einsum("on,wnm->wom", model.out_state, resp) + model.out_feed[None, :, :]


def transfer(model: LtiModel, omega: float) -> tuple:
    """``(TransferRow for U1_out, TransferRow for U2_out)`` at one frequency."""
    t = transfer_matrix(model, [omega])[0]
    names = tuple(ch.name for ch in model.channels)
    return tuple(TransferRow(float(omega), OUTPUTS[i], t[i].copy(), names) for i in range(2))


# -- spectra -----------------------------------------------------------------


def optimal_quadrature(s1, s2, s12):
    """Minimal quadrature noise and the angle that reaches it.

    ``S(phi) = s1 cos^2 phi + s2 sin^2 phi + s12 sin 2 phi``; the minimum is
    returned in the closed form and ``phi`` is folded into ``(-pi/2, pi/2]``
    with ``phi = 0`` when the quadratures are degenerate.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    s12 = np.asarray(s12, dtype=float)
    # work in units of the larger diagonal entry so tiny spectra do not underflow
    scale = np.maximum(np.maximum(np.abs(s1), np.abs(s2)), np.abs(s12))
    unit = np.where(scale > 0, scale, 1.0)
    a, b, c = s1 / unit, s2 / unit, s12 / unit
    root = np.sqrt((a - b) ** 2 + 4 * c**2)
    den = a + b + root
    with np.errstate(invalid="ignore", divide="ignore"):
        s_opt = unit * np.where(den > 0, (2 * a * b - 2 * c**2) / np.where(den > 0, den, 1.0), 0.0)
    phi = 0.5 * np.arctan2(-2 * s12, s2 - s1)
    phi = np.where(phi <= -np.pi / 2, phi + np.pi, phi) + 0.0
    if s_opt.ndim == 0:
        return float(s_opt), float(phi)
    return s_opt, phi


def quadrature_spectrum(s1, s2, s12, phi):
    """Noise of the quadrature ``U1 cos phi + U2 sin phi``."""
    return s1 * np.cos(phi) ** 2 + s2 * np.sin(phi) ** 2 + s12 * np.sin(2 * phi)


def effective_occupancy(s1, s2, s12=0.0):
    """``n_eff`` from ``(1 + 2 n_eff)^2 = 4 s1 s2``; NaN unless ``s12`` vanishes."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    s12 = np.asarray(s12, dtype=float)
    ok = np.abs(s12) <= _DECOUPLED_RTOL * np.maximum(np.abs(s1), np.abs(s2))
    n = 0.5 * (2 * np.sqrt(np.clip(s1 * s2, 0, None)) - 1)
    return np.where(ok, n, np.nan)


def spectra_from_transfer(omegas, t_u1, t_u2, noise) -> Spectra:
    """Assemble :class:`Spectra` from stacked transfer rows.

    ``t_u1``/``t_u2`` have shape ``(n_omega, n_terms)``; a Floquet caller
    flattens sidebands into the term axis with a block-diagonal ``noise``.
    """
    s11 = kernels.spectral_density(t_u1, noise, t_u1).real
    s22 = kernels.spectral_density(t_u2, noise, t_u2).real
    s12 = kernels.spectral_density(t_u1, noise, t_u2).real
    # a cross term below the summation roundoff is structurally zero
    roundoff = t_u1.shape[-1] * np.finfo(float).eps * (np.abs(s11) + np.abs(s22))
    s12 = np.where(np.abs(s12) <= roundoff, 0.0, s12)
    s_opt, phi = optimal_quadrature(s11, s22, s12)
    w = np.asarray(omegas, dtype=float)
    return Spectra(w, s11, s22, s12, np.atleast_1d(s_opt), np.atleast_1d(phi),
                   effective_occupancy(s11, s22, s12))


def spectra(model: LtiModel, omegas) -> Spectra:
    """Output spectra of ``model`` on a frequency grid."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    t = transfer_matrix(model, w)
    return spectra_from_transfer(w, t[:, 0, :], t[:, 1, :], model.noise_corr)


def spectrum_point(model: LtiModel, omega: float) -> SpectrumPoint:
    return spectra(model, [omega]).point(0)


# -- measurement -------------------------------------------------------------


def mean_response(model: LtiModel, drive_vector, omega: float = 0.0, z: float = 1.0) -> float:
    """Homodyne slope ``d<I>/dz`` with ``I = sqrt(kappa_out) U1_out``.

    ``drive_vector`` is the deterministic force produced by the signal value
    ``z`` (as returned by :func:`~optosqueeze.model.build_measurement`).
    Returns a complex number when ``omega != 0``.
    """
    if z == 0:
        raise ValueError("z must be non-zero to extract a slope")
    f = np.asarray(drive_vector, dtype=float).reshape(-1, 1)
    _check_poles(model, np.array([omega], dtype=float))
    x = kernels.lti_response(model.drift, f, [omega])[0][:, 0]
    # mean inputs vanish, so only the intracavity part reaches the output
    current = math.sqrt(model.params.kappa_out) * (model.out_state[0] @ x)
    value = current / z
    if omega == 0:
        return float(value.real)
    return complex(value)


def symmetrized_current_spectrum(model: LtiModel, omega: float = 0.0) -> float:
    """``S_II[w] = 2 kappa_out * (S_U1[w] + S_U1[-w]) / 2`` (symmetrized)."""
    sp = spectra(model, [omega, -omega])
    return float(2 * model.params.kappa_out * 0.5 * (sp.s_u1[0] + sp.s_u1[1]))


def measurement_rate(chi_meas: float, s_ii_zero: float) -> float:
    """``Gamma_meas = chi_meas^2 / (2 S_II[0])``."""
    if not s_ii_zero > 0:
        raise ValueError("current spectrum must be positive")
    return chi_meas**2 / (2 * s_ii_zero)


def squeezing_db(ratio) -> np.ndarray:
    """``-10 log10(S / S_SN)``; positive numbers mean squeezing."""
    return -10 * np.log10(ratio)


def as_sequence(points: Sequence[SpectrumPoint]) -> Spectra:
    """Pack points back into arrays."""
    nan = float("nan")
    return Spectra(
        np.array([p.omega for p in points]),
        np.array([p.s_u1 for p in points]),
        np.array([p.s_u2 for p in points]),
        np.array([p.s_u12 for p in points]),
        np.array([p.s_opt for p in points]),
        np.array([p.phi_opt for p in points]),
        np.array([nan if p.n_eff is None else p.n_eff for p in points]),
    )
