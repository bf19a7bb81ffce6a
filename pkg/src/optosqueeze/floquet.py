"""Harmonic-truncation solver for the time-periodic Langevin equations.

Keeping the counter-rotating terms makes the drift periodic,
``A(t) = sum_n A_n exp(-i n Omega t)``, which couples ``x[w]`` to the
sidebands ``x[w + k Omega]``.  The sideband ladder is truncated at
``|k| <= n_harm * step`` where ``step`` is the gcd of the non-zero block
offsets (2 for the bare two-tone drive, 1 once a resonant measurement tone
is added); sidebands off that sub-lattice never couple to ``k = 0``.

The stationary spectrum is the ``t``-averaged (harmonic-0) part of the
two-time correlator,

    S_AB[w] = sum_k T^A_k[w] N conj(T^B_k[w]),

where ``T_k`` is the response of the output at ``w`` to input noise at
``w + k Omega``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Optional

import numpy as np

from . import kernels
from .kernels import SingularSystemError
from .linres import Spectra, SpectrumPoint, spectra_from_transfer
from .model import (
    EPS_STAB,
    LtiModel,
    Scheme,
    Stability,
    classify_eigenvalues,
)

__all__ = [
    "LADDER_BASIS",
    "FloquetModel",
    "FloquetError",
    "ConvergenceError",
    "ConvergenceReport",
    "quad_from_ladder",
    "ladder_from_quad",
    "lift",
    "floquet_spectra",
    "floquet_spectrum",
    "floquet_mean_response",
    "check_convergence",
    "truncation_stability",
]

LADDER_BASIS = ("d", "d+", "b", "b+")
D, DD, B, BD = range(4)

DEFAULT_HARMONICS = 4
MAX_HARMONICS = 8
MIN_HARMONICS = 2
CONVERGENCE_RTOL = 1e-6

_S = 1 / math.sqrt(2)
#: x_quad = _T @ x_ladder for (U1, U2, X1, X2) <- (d, d+, b, b+)
_T = np.array(
    [
        [_S, _S, 0, 0],
        [-1j * _S, 1j * _S, 0, 0],
        [0, 0, _S, _S],
        [0, 0, -1j * _S, 1j * _S],
    ]
)
_TINV = np.linalg.inv(_T)


def quad_from_ladder(block):
    """Change a ladder-basis generator (or vector) to the quadrature basis."""
    block = np.asarray(block)
    if block.ndim == 1:
        return _T @ block
    return _T @ block @ _TINV


def ladder_from_quad(block):
    block = np.asarray(block)
    if block.ndim == 1:
        return _TINV @ block
    return _TINV @ block @ _T


class FloquetError(RuntimeError):
    pass


class ConvergenceError(FloquetError):
    def __init__(self, message, previous, last):
        super().__init__(message)
        self.previous = previous
        self.last = last


@dataclass(frozen=True, eq=False)
class FloquetModel:
    """Periodic extension of an :class:`LtiModel`.

    ``blocks[n]`` is the coefficient of ``exp(-i n Omega t)`` in the drift,
    in the ladder basis ``(d, d+, b, b+)``.  ``drive_harmonics[n]`` holds the
    deterministic force per unit signal ``z`` (ladder basis).
    """

    base_freq: float
    blocks: dict
    base: LtiModel
    n_harm: int = DEFAULT_HARMONICS
    drive_harmonics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.base_freq > 0:
            raise ValueError("base frequency must be positive")
        if self.n_harm < 0:
            raise ValueError("n_harm must be non-negative")
        if self.has_cr and self.n_harm < MIN_HARMONICS:
            raise ValueError(f"counter-rotating blocks need n_harm >= {MIN_HARMONICS}")

    @property
    def step(self) -> int:
        """Sideband spacing (in units of ``base_freq``) reachable from harmonic 0."""
        offs = [abs(k) for k, v in self.blocks.items() if k != 0 and np.any(v != 0)]
        offs += [abs(k) for k, v in self.drive_harmonics.items() if k != 0 and np.any(v != 0)]
        return reduce(math.gcd, offs, 0) or 1

    @property
    def has_cr(self) -> bool:
        return any(k != 0 and np.any(v != 0) for k, v in self.blocks.items())

    def harmonics(self, n_harm: Optional[int] = None) -> np.ndarray:
        n = self.n_harm if n_harm is None else n_harm
        if not self.has_cr and not self.drive_harmonics:
            n = 0
        return self.step * np.arange(-n, n + 1)

    def quad_blocks(self) -> dict:
        return {k: quad_from_ladder(v) for k, v in self.blocks.items()}

    def with_harmonics(self, n_harm: int) -> "FloquetModel":
        return replace(self, n_harm=n_harm)

    def without_cr(self) -> "FloquetModel":
        return replace(self, blocks={0: self.blocks[0]}, drive_harmonics={
            k: v for k, v in self.drive_harmonics.items() if k == 0})


def _cr_blocks(g_minus: float, g_plus: float) -> dict:
    """Two-tone counter-rotating terms ``-d+(G+ b e^{-2iWt} + G- b+ e^{2iWt}) + h.c.``."""
    up = np.zeros((4, 4), dtype=complex)  # e^{-2i Omega t}, n = +2
    dn = np.zeros((4, 4), dtype=complex)  # e^{+2i Omega t}, n = -2
    up[D, B] = 1j * g_plus
    dn[D, BD] = 1j * g_minus
    dn[DD, BD] = -1j * g_plus
    up[DD, B] = -1j * g_minus
    dn[B, DD] = 1j * g_minus
    dn[B, D] = 1j * g_plus
    up[BD, D] = -1j * g_minus
    up[BD, DD] = -1j * g_plus
    return {2: up, -2: dn}


def _measurement_blocks(g_zero: float) -> dict:
    """``-2 G0 (X1 cos Wt + X2 sin Wt) U2`` from the resonant measurement tone."""
    up = np.zeros((4, 4), dtype=complex)  # e^{-i Omega t}, n = +1
    dn = np.zeros((4, 4), dtype=complex)  # n = -1
    up[D, B] = up[DD, B] = -g_zero
    dn[D, BD] = dn[DD, BD] = -g_zero
    dn[B, D], dn[B, DD] = g_zero, -g_zero
    up[BD, D], up[BD, DD] = -g_zero, g_zero
    return {1: up, -1: dn}


def lift(model: LtiModel, params=None, drives=None, *, include_cr: bool = True,
         n_harm: int = DEFAULT_HARMONICS) -> FloquetModel:
    """Add the non-resonant terms dropped by the rotating-wave approximation.

    Two-tone schemes get blocks at ``n = +-2``; a measurement tone with
    ``g_zero > 0`` adds ``n = +-1``.  The signal-proportional counter-rotating
    forces only enter ``drive_harmonics`` (they are deterministic and leave
    the noise untouched).
    """
    params = model.params if params is None else params
    drives = model.drives if drives is None else drives
    if not params.omega_m > 0:
        raise ValueError("mechanical frequency must be positive")
    blocks = {0: ladder_from_quad(model.drift)}
    drive_h = {}
    if drives.scheme is Scheme.MEASUREMENT and drives.a_zero != 0:
        drive_h[0] = ladder_from_quad(np.array([-math.sqrt(2) * drives.a_zero, 0, 0, 0], dtype=complex))
    if include_cr:
        if drives.scheme in (Scheme.PONDEROMOTIVE, Scheme.DISSIPATIVE_PHASE_NOISE):
            raise ValueError(f"counter-rotating terms are not modelled for {drives.scheme.value}")
        if drives.g_minus or drives.g_plus:
            blocks.update(_cr_blocks(drives.g_minus, drives.g_plus))
        if drives.scheme is Scheme.MEASUREMENT and drives.g_zero > 0:
            blocks.update(_measurement_blocks(drives.g_zero))
            if drives.a_zero != 0:
                ratio = drives.a_zero / drives.g_zero  # A/g0
                a_p, a_m = ratio * drives.g_plus, ratio * drives.g_minus
                # U1' -= sqrt2 (A- - A+) sin Wt ; U2' += sqrt2 (A+ + A-) cos Wt
                s, c = math.sqrt(2) * (a_m - a_p), math.sqrt(2) * (a_p + a_m)
                for n, sin_c, cos_c in ((1, 0.5j, 0.5), (-1, -0.5j, 0.5)):
                    fq = np.array([-s * sin_c, c * cos_c, 0, 0], dtype=complex)
                    drive_h[n] = ladder_from_quad(fq)
    return FloquetModel(params.omega_m, blocks, model, n_harm, drive_h)


# -- linear algebra ----------------------------------------------------------


def _generator(fm: FloquetModel, ks: np.ndarray) -> np.ndarray:
    """Sideband generator ``F`` with ``M(w) = -i w - F``."""
    qb = fm.quad_blocks()
    n = fm.base.n_states
    K = ks.size
    F = np.zeros((K * n, K * n), dtype=complex)
    for a, ka in enumerate(ks):
        for b, kb in enumerate(ks):
            blk = qb.get(int(ka - kb))
            if blk is not None:
                F[a * n : (a + 1) * n, b * n : (b + 1) * n] = blk
        F[a * n : (a + 1) * n, a * n : (a + 1) * n] += 1j * ka * fm.base_freq * np.eye(n)
    return F


def truncation_stability(fm: FloquetModel, n_harm: Optional[int] = None) -> Stability:
    ks = fm.harmonics(n_harm)
    return classify_eigenvalues(np.linalg.eigvals(_generator(fm, ks)), EPS_STAB)


def _require_stable(fm, ks, F):
    status = classify_eigenvalues(np.linalg.eigvals(F), EPS_STAB)
    if status is not Stability.STABLE:
        d = fm.base.drives
        raise FloquetError(
            f"truncated Floquet system is {status.value} at n_harm={(ks.size - 1) // 2} "
            f"(g_minus={d.g_minus!r}, g_plus={d.g_plus!r}, g_zero={d.g_zero!r})"
        )


def _spectra_at(fm: FloquetModel, omegas: np.ndarray, n_harm: int) -> Spectra:
    ks = fm.harmonics(n_harm)
    F = _generator(fm, ks)
    _require_stable(fm, ks, F)
    n = fm.base.n_states
    K = ks.size
    size = K * n
    i0 = int(np.flatnonzero(ks == 0)[0])
    mats = -F[None, :, :] - 1j * omegas[:, None, None] * np.eye(size)[None, :, :]
    # rows of M^-1 belonging to harmonic 0, via M^T Y = E0
    e0 = np.zeros((size, n), dtype=complex)
    e0[i0 * n : (i0 + 1) * n, :] = np.eye(n)
    rhs = np.broadcast_to(e0, (omegas.size, size, n))
    y = kernels.solve_batch(np.transpose(mats, (0, 2, 1)), rhs)
    r0 = np.transpose(y, (0, 2, 1))  # (nw, n, K n)
    base = fm.base
    m = base.n_channels
    t = np.empty((omegas.size, 2, K, m), dtype=complex)
    for j in range(K):
        t[:, :, j, :] = np.einsum("on,wnp,pm->wom", base.out_state, r0[:, :, j * n : (j + 1) * n], base.in_map)
    t[:, :, i0, :] += base.out_feed[None, :, :]
    noise = np.kron(np.eye(K), base.noise_corr)
    t = t.reshape(omegas.size, 2, K * m)
    return spectra_from_transfer(omegas, t[:, 0, :], t[:, 1, :], noise)


def _rel_change(a: Spectra, b: Spectra) -> float:
    worst = 0.0
    for name in ("s_u1", "s_u2", "s_opt"):
        x, y = getattr(a, name), getattr(b, name)
        scale = np.maximum(np.abs(y), 1e-300)
        worst = max(worst, float(np.max(np.abs(x - y) / scale)))
    return worst


@dataclass(frozen=True)
class FloquetResult:
    spectra: Spectra
    n_harm: int
    rel_change: float
    converged: bool


def floquet_spectra(fm: FloquetModel, omegas, *, rtol: float = CONVERGENCE_RTOL,
                    n_max: int = MAX_HARMONICS, strict: bool = True) -> FloquetResult:
    """Stationary output spectra with automatic truncation escalation.

    Starts at ``fm.n_harm`` and adds sideband orders until two successive
    truncations agree to ``rtol`` (``n_max`` at most).  With ``strict`` a
    non-converged result raises :class:`ConvergenceError`; otherwise it is
    returned flagged.
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(w)):
        raise ValueError("frequencies must be finite")
    if not fm.has_cr:
        return FloquetResult(_spectra_at(fm, w, 0), 0, 0.0, True)
    n = fm.n_harm
    prev = _spectra_at(fm, w, n)
    while True:
        cur = _spectra_at(fm, w, n + 1)
        change = _rel_change(prev, cur)
        if change < rtol:
            return FloquetResult(cur, n + 1, change, True)
        if n + 1 >= n_max:
            if strict:
                raise ConvergenceError(
                    f"Floquet spectra not converged at n_harm={n + 1} (relative change {change:.3g})",
                    prev, cur,
                )
            return FloquetResult(cur, n + 1, change, False)
        prev = cur
        n += 1


def floquet_spectrum(fm: FloquetModel, omega: float, quadrature: Optional[str] = None, **kw):
    """Single-frequency spectrum point (converged), or one named quadrature value.

    ``quadrature`` may be ``"u1"``, ``"u2"``, ``"u12"`` or ``"opt"``.
    """
    point = floquet_spectra(fm, [omega], **kw).spectra.point(0)
    if quadrature is None:
        return point
    return _pick(point, quadrature)


def _pick(point: SpectrumPoint, quadrature: str) -> float:
    key = {"u1": "s_u1", "u2": "s_u2", "u12": "s_u12", "opt": "s_opt"}.get(quadrature.lower())
    if key is None:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    return getattr(point, key)


@dataclass(frozen=True)
class ConvergenceReport:
    n_harm: int
    value: float
    value_next: float
    rel_diff: float


def check_convergence(fm: FloquetModel, omega: float, quadrature: str = "u1",
                      n_harm: Optional[int] = None) -> ConvergenceReport:
    """Compare the truncations ``n_harm`` and ``n_harm + 1`` without deciding."""
    n = fm.n_harm if n_harm is None else n_harm
    w = np.array([float(omega)])
    a = _pick(_spectra_at(fm, w, n).point(0), quadrature)
    b = _pick(_spectra_at(fm, w, n + 1).point(0), quadrature)
    diff = abs(a - b) / abs(b) if b != 0 else (0.0 if a == 0 else math.inf)
    return ConvergenceReport(n, a, b, diff)


# -- deterministic response ----------------------------------------------------


def _mean_at(fm: FloquetModel, n_harm: int) -> complex:
    ks = fm.harmonics(n_harm)
    F = _generator(fm, ks)
    _require_stable(fm, ks, F)
    n = fm.base.n_states
    f = np.zeros(ks.size * n, dtype=complex)
    for j, k in enumerate(ks):
        v = fm.drive_harmonics.get(int(k))
        if v is not None:
            f[j * n : (j + 1) * n] = quad_from_ladder(v)
    x = kernels.solve_batch(-F[None], f[None, :, None])[0][:, 0]
    i0 = int(np.flatnonzero(ks == 0)[0])
    x0 = x[i0 * n : (i0 + 1) * n]
    base = fm.base
    return math.sqrt(base.params.kappa_out) * (base.out_state[0] @ x0)


def floquet_mean_response(fm: FloquetModel, z: float = 1.0, *, rtol: float = CONVERGENCE_RTOL,
                          n_max: int = MAX_HARMONICS) -> float:
    """Time-averaged homodyne slope ``d<I>/dz`` including sideband drives.

    The response is linear in ``z``; ``z`` only fixes the drive amplitude.
    """
    if z == 0:
        raise ValueError("z must be non-zero to extract a slope")
    if not fm.drive_harmonics:
        return 0.0
    if not fm.has_cr:
        return float((_mean_at(fm, 0) * z / z).real)
    n = fm.n_harm
    prev = _mean_at(fm, n)
    while True:
        cur = _mean_at(fm, n + 1)
        change = abs(cur - prev) / max(abs(cur), 1e-300)
        if change < rtol:
            return float(cur.real)
        if n + 1 >= n_max:
            raise ConvergenceError(
                f"mean response not converged at n_harm={n + 1} (relative change {change:.3g})",
                prev, cur,
            )
        prev = cur
        n += 1


__all__ += ["FloquetResult", "SingularSystemError"]
