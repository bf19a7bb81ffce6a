"""Physical parameters and linear Langevin models for the squeezing schemes.

All models live in the quadrature basis ``(U1, U2, X1, X2)``::

    U1 = (d + d^+)/sqrt(2)      U2 = -i(d - d^+)/sqrt(2)
    X1 = (b + b^+)/sqrt(2)      X2 =  i(b^+ - b)/sqrt(2)

so that ``[U1, U2] = [X1, X2] = i``.  Rates are dimensionless; pick one
reference rate (usually the total cavity decay) and express everything in it.

Input noise enters every equation with a ``+sqrt(rate)`` coupling and the
observed output is ``U_out = sqrt(kappa_out) U - U_in``.  This is the usual
``d_out = d_in + sqrt(kappa) d`` relation after ``d_in -> -d_in``; spectra do
not depend on the sign of the vacuum input.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "BASIS",
    "EPS_STAB",
    "Scheme",
    "PhysParams",
    "DriveConfig",
    "MeasurementSignal",
    "Channel",
    "LtiModel",
    "Stability",
    "UnmatchableError",
    "vacuum_correlator",
    "thermal_correlator",
    "build_dissipative",
    "build_ponderomotive",
    "build_lossy",
    "build_phase_noise",
    "build_measurement",
    "build_model",
    "linear_cavity",
    "impedance_match",
    "squeeze_parameter",
    "exp_minus_2r",
    "cooperativity",
    "kappa_tilde",
    "drives_from_squeezing",
    "matched_drives",
    "stability_check",
]

BASIS = ("U1", "U2", "X1", "X2")
U1, U2, X1, X2 = range(4)

#: Real parts within this distance of zero count as marginal.
EPS_STAB = 1e-10


class Scheme(str, enum.Enum):
    DISSIPATIVE = "Dissipative"
    PONDEROMOTIVE = "Ponderomotive"
    MEASUREMENT = "Measurement"
    DISSIPATIVE_LOSSY = "DissipativeLossy"
    DISSIPATIVE_PHASE_NOISE = "DissipativePhaseNoise"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace("-", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown scheme {value!r}")


@dataclass(frozen=True)
class PhysParams:
    """Fixed rates of cavity, mechanics and baths.

    ``kappa_total`` is derived, never stored.
    """

    omega_m: float = 1.0
    kappa_out: float = 1.0
    kappa_int: float = 0.0
    gamma_m: float = 1e-3
    g0: float = 0.0
    n_th: float = 0.0
    gamma_l: float = 0.0

    def __post_init__(self):
        for name in ("omega_m", "kappa_out", "kappa_int", "gamma_m", "g0", "n_th", "gamma_l"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.omega_m <= 0:
            raise ValueError("omega_m must be positive")
        if self.kappa_out < 0 or self.kappa_int < 0:
            raise ValueError("cavity decay rates must be non-negative")
        if self.kappa_out + self.kappa_int <= 0:
            raise ValueError("kappa_out + kappa_int must be positive")
        if self.gamma_m <= 0:
            raise ValueError("gamma_m must be positive")
        if self.n_th < 0:
            raise ValueError("n_th must be non-negative")
        if self.gamma_l < 0:
            raise ValueError("gamma_l must be non-negative")

    @property
    def kappa_total(self) -> float:
        return self.kappa_out + self.kappa_int

    def replace(self, **changes) -> "PhysParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveConfig:
    """Drive-enhanced couplings.  For the ponderomotive scheme ``g_minus`` is
    the single resonant coupling ``G``."""

    g_minus: float = 0.0
    g_plus: float = 0.0
    g_zero: float = 0.0
    a_zero: float = 0.0
    scheme: Scheme = Scheme.DISSIPATIVE

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        for name in ("g_minus", "g_plus", "g_zero", "a_zero"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.g_minus < 0 or self.g_plus < 0 or self.g_zero < 0:
            raise ValueError("optomechanical couplings must be non-negative")
        if self.scheme is Scheme.PONDEROMOTIVE and (self.g_plus != 0 or self.g_zero != 0):
            raise ValueError("ponderomotive drives carry only g_minus (the resonant coupling G)")

    def replace(self, **changes) -> "DriveConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class MeasurementSignal:
    z: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise ValueError("signal z must be finite")


@dataclass(frozen=True)
class Channel:
    """One input noise operator: its coupling column and the rate it enters with."""

    name: str
    vector: tuple
    rate: float


@dataclass(frozen=True, eq=False)
class LtiModel:
    """Time-invariant linear Langevin system ``x' = drift x + in_map xi``.

    ``noise_corr[j, k]`` is the non-symmetrized white-noise correlator
    ``<xi_j(t) xi_k(t')> = N_jk delta(t - t')``.  ``out_rows`` maps
    ``(state, inputs)`` onto the observed output quadratures ``(U1_out, U2_out)``
    as ``out_state @ x + out_feed @ xi``.
    """

    drift: np.ndarray
    in_map: np.ndarray
    noise_corr: np.ndarray
    out_state: np.ndarray
    out_feed: np.ndarray
    channels: tuple
    scheme: Scheme
    params: PhysParams
    drives: DriveConfig
    basis_labels: tuple = BASIS
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.drift.shape[0]
        m = self.in_map.shape[1]
        if self.drift.shape != (n, n) or len(self.basis_labels) != n:
            raise ValueError("drift must be square and match the basis")
        if self.in_map.shape != (n, m) or self.noise_corr.shape != (m, m):
            raise ValueError("in_map / noise_corr shapes inconsistent")
        if self.out_state.shape[1] != n or self.out_feed.shape != (self.out_state.shape[0], m):
            raise ValueError("output rows inconsistent with state / channels")
        if len(self.channels) != m:
            raise ValueError("channel list inconsistent with in_map")
        for arr in (self.drift, self.in_map, self.noise_corr, self.out_state, self.out_feed):
            arr.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.drift.shape[0]

    @property
    def n_channels(self) -> int:
        return self.in_map.shape[1]

    @property
    def kappa_out(self) -> float:
        return self.params.kappa_out

    def channel_index(self, name: str) -> int:
        for i, ch in enumerate(self.channels):
            if ch.name == name:
                return i
        raise KeyError(name)

    def with_drift(self, drift) -> "LtiModel":
        return replace(self, drift=np.array(drift, dtype=float))


def vacuum_correlator() -> np.ndarray:
    """Quadrature correlator of an optical vacuum input, ordered (U1_in, U2_in)."""
    return np.array([[0.5, 0.5j], [-0.5j, 0.5]])


def thermal_correlator(n_th: float) -> np.ndarray:
    """Quadrature correlator of the mechanical bath, ordered (X1_in, X2_in)."""
    s = (1.0 + 2.0 * n_th) / 2.0
    return np.array([[s, 0.5j], [-0.5j, s]])


class UnmatchableError(ValueError):
    """Cooperativity below one: no blue drive satisfies impedance matching."""

    def __init__(self, g_minus, g_minus_min):
        self.g_minus = g_minus
        self.g_minus_min = g_minus_min
        super().__init__(
            f"cannot impedance match with g_minus={g_minus!r}: need g_minus >= {g_minus_min!r} (C >= 1)"
        )


# -- drive algebra -----------------------------------------------------------


def cooperativity(params: PhysParams, g: float) -> float:
    """``C = 4 g^2 / (kappa_tot Gamma_M)``."""
    return 4.0 * g * g / (params.kappa_total * params.gamma_m)


def kappa_tilde(params: PhysParams, drives: DriveConfig) -> float:
    """Optomechanical damping of the U1 quadrature at resonance, ``4(G-^2 - G+^2)/Gamma_M``."""
    gm, gp = drives.g_minus, drives.g_plus
    return 4.0 * (gm - gp) * (gm + gp) / params.gamma_m


def impedance_match(params: PhysParams, g_minus: float) -> float:
    """Blue coupling that makes the induced damping equal ``kappa_tot``."""
    need = params.kappa_total * params.gamma_m / 4.0
    excess = g_minus * g_minus - need
    if excess < 0:
        # tolerate round-off at exactly C = 1
        if excess > -1e-14 * need:
            return 0.0
        raise UnmatchableError(g_minus, math.sqrt(need))
    return math.sqrt(excess)


def squeeze_parameter(g_plus: float, g_minus: float) -> float:
    """Squeeze parameter ``r`` with ``tanh r = g_plus / g_minus``.

    Evaluated as ``log((g- + g+)/(g- - g+)) / 2`` so large ``r`` stays accurate.
    """
    if g_plus < 0 or g_minus <= 0 or g_plus >= g_minus:
        raise ValueError("squeeze parameter needs 0 <= g_plus < g_minus")
    return 0.5 * math.log((g_minus + g_plus) / (g_minus - g_plus))


def exp_minus_2r(g_plus: float, g_minus: float) -> float:
    """``exp(-2r) = (g- - g+)/(g- + g+)``, free of overflow for large ``r``."""
    if g_plus < 0 or g_minus <= 0 or g_plus >= g_minus:
        raise ValueError("squeeze parameter needs 0 <= g_plus < g_minus")
    return (g_minus - g_plus) / (g_minus + g_plus)


def drives_from_squeezing(g_eff: float, r: float, scheme=Scheme.DISSIPATIVE, **extra) -> DriveConfig:
    """Drives with ``G-^2 - G+^2 = g_eff^2`` and ``tanh r = G+/G-``."""
    return DriveConfig(
        g_minus=g_eff * math.cosh(r), g_plus=g_eff * math.sinh(r), scheme=scheme, **extra
    )


def matched_drives(params: PhysParams, c: float, scheme=Scheme.DISSIPATIVE, **extra) -> DriveConfig:
    """Red drive at cooperativity ``c`` and the impedance-matched blue drive."""
    if c < 1:
        raise UnmatchableError(
            math.sqrt(c * params.kappa_total * params.gamma_m / 4.0),
            math.sqrt(params.kappa_total * params.gamma_m / 4.0),
        )
    unit = params.kappa_total * params.gamma_m / 4.0
    # (c - 1) * unit avoids the cancellation in g_minus^2 - unit near c = 1
    return DriveConfig(
        g_minus=math.sqrt(c * unit), g_plus=math.sqrt((c - 1.0) * unit), scheme=scheme, **extra
    )


# -- builders ----------------------------------------------------------------


def _require(drives: DriveConfig, *schemes: Scheme):
    if drives.scheme not in schemes:
        names = ", ".join(s.value for s in schemes)
        raise ValueError(f"drive scheme {drives.scheme.value} given, expected {names}")


def _check_dissipative(params: PhysParams, drives: DriveConfig):
    if drives.g_plus > drives.g_minus:
        raise ValueError(
            f"unstable drives: g_plus={drives.g_plus!r} exceeds g_minus={drives.g_minus!r}"
        )
    if params.gamma_m <= 0:
        raise ValueError("gamma_m must be positive")


def _optical_channels(kappa_out: float, kappa_int: float):
    chans = [
        Channel("U1_in", (1.0, 0.0, 0.0, 0.0), kappa_out),
        Channel("U2_in", (0.0, 1.0, 0.0, 0.0), kappa_out),
    ]
    if kappa_int > 0:
        chans += [
            Channel("U1_int", (1.0, 0.0, 0.0, 0.0), kappa_int),
            Channel("U2_int", (0.0, 1.0, 0.0, 0.0), kappa_int),
        ]
    return chans


def _mechanical_channels(gamma_m: float):
    return [
        Channel("X1_in", (0.0, 0.0, 1.0, 0.0), gamma_m),
        Channel("X2_in", (0.0, 0.0, 0.0, 1.0), gamma_m),
    ]


def _assemble(drift, channels, blocks, params, drives, meta=None) -> LtiModel:
    """Stack channels into ``in_map`` and a block-diagonal correlator."""
    m = len(channels)
    in_map = np.zeros((4, m))
    for j, ch in enumerate(channels):
        in_map[:, j] = np.asarray(ch.vector) * math.sqrt(ch.rate)
    noise = np.zeros((m, m), dtype=complex)
    j = 0
    for block in blocks:
        k = block.shape[0]
        noise[j : j + k, j : j + k] = block
        j += k
    if j != m:
        raise AssertionError("correlator blocks do not cover every channel")
    out_state = np.zeros((2, 4))
    out_state[0, U1] = out_state[1, U2] = math.sqrt(params.kappa_out)
    out_feed = np.zeros((2, m))
    out_feed[0, 0] = out_feed[1, 1] = -1.0
    return LtiModel(
        drift=np.asarray(drift, dtype=float),
        in_map=in_map,
        noise_corr=noise,
        out_state=out_state,
        out_feed=out_feed,
        channels=tuple(channels),
        scheme=drives.scheme,
        params=params,
        drives=drives,
        meta=dict(meta or {}),
    )


def _dissipative_drift(kappa: float, gamma_m: float, g_minus: float, g_plus: float) -> np.ndarray:
    gd = g_minus - g_plus
    gs = g_minus + g_plus
    a = np.zeros((4, 4))
    a[U1, U1] = a[U2, U2] = -kappa / 2
    a[X1, X1] = a[X2, X2] = -gamma_m / 2
    a[U1, X2] = -gd
    a[X2, U1] = gs
    a[U2, X1] = gs
    a[X1, U2] = -gd
    return a


def _dissipative_core(params: PhysParams, drives: DriveConfig) -> LtiModel:
    _check_dissipative(params, drives)
    drift = _dissipative_drift(params.kappa_total, params.gamma_m, drives.g_minus, drives.g_plus)
    channels = _optical_channels(params.kappa_out, params.kappa_int) + _mechanical_channels(
        params.gamma_m
    )
    blocks = [vacuum_correlator()]
    if params.kappa_int > 0:
        blocks.append(vacuum_correlator())
    blocks.append(thermal_correlator(params.n_th))
    return _assemble(drift, channels, blocks, params, drives)


def build_dissipative(params: PhysParams, drives: DriveConfig) -> LtiModel:
    """Two-tone (red + blue sideband) drive in the rotating-wave approximation.

    The drift couples the pairs ``(U1, X2)`` and ``(U2, X1)``::

        U1' = -kappa/2 U1 - (G- - G+) X2      X2' = (G- + G+) U1 - Gamma_M/2 X2
        U2' = -kappa/2 U2 + (G- + G+) X1      X1' = -(G- - G+) U2 - Gamma_M/2 X1

    Internal loss, when present, adds an unobserved vacuum port.
    """
    _require(drives, Scheme.DISSIPATIVE, Scheme.DISSIPATIVE_LOSSY, Scheme.MEASUREMENT)
    return _dissipative_core(params, drives)


def build_lossy(params: PhysParams, drives: DriveConfig) -> LtiModel:
    """Dissipative scheme with a second, unobserved decay channel at ``kappa_int``."""
    _require(drives, Scheme.DISSIPATIVE_LOSSY, Scheme.DISSIPATIVE)
    return _dissipative_core(params, drives)


def build_phase_noise(params: PhysParams, drives: DriveConfig) -> LtiModel:
    """Dissipative scheme plus classical laser phase noise.

    The demodulated ``phi_dot sin(Omega t)`` and ``phi_dot cos(Omega t)``
    forces become two independent white forces on ``U1`` and ``U2`` with
    ``<f(t) f(t')> = 2 Gamma_L (G- -/+ G+)^2 / g0^2 delta(t - t')``.
    """
    _require(drives, Scheme.DISSIPATIVE_PHASE_NOISE)
    if params.gamma_l > 0 and params.g0 <= 0:
        raise ValueError("laser phase noise needs g0 > 0")
    base = _dissipative_core(params, drives)
    if params.gamma_l == 0:
        return base
    gd = drives.g_minus - drives.g_plus
    gs = drives.g_minus + drives.g_plus
    p1 = 2.0 * params.gamma_l * gd * gd / params.g0**2
    p2 = 2.0 * params.gamma_l * gs * gs / params.g0**2
    channels = list(base.channels) + [
        Channel("phase_U1", (1.0, 0.0, 0.0, 0.0), 1.0),
        Channel("phase_U2", (0.0, 1.0, 0.0, 0.0), 1.0),
    ]
    m = len(channels)
    noise = np.zeros((m, m), dtype=complex)
    noise[: m - 2, : m - 2] = base.noise_corr
    noise[m - 2, m - 2] = p1
    noise[m - 1, m - 1] = p2
    in_map = np.zeros((4, m))
    in_map[:, : m - 2] = base.in_map
    in_map[U1, m - 2] = 1.0
    in_map[U2, m - 1] = 1.0
    out_feed = np.zeros((2, m))
    out_feed[:, : m - 2] = base.out_feed
    return replace(base, in_map=in_map, noise_corr=noise, out_feed=out_feed, channels=tuple(channels))


def build_ponderomotive(params: PhysParams, drives: DriveConfig) -> LtiModel:
    """Single resonant drive; mechanics kept in the lab frame.

    The mechanical block uses the frequency ``sqrt(Omega^2 - Gamma_M^2/4)``
    so that, with amplitude damping ``Gamma_M/2`` on both quadratures, the
    response denominator is exactly ``Omega^2 - w^2 - i w Gamma_M``.  The
    shift is of order ``(Gamma_M/Omega)^2``.
    """
    _require(drives, Scheme.PONDEROMOTIVE)
    g = drives.g_minus
    if not g > 0:
        raise ValueError("ponderomotive coupling G = g_minus must be positive")
    if params.kappa_int > 0:
        raise ValueError("ponderomotive builder models a single-port cavity (kappa_int = 0)")
    if params.gamma_m >= 2 * params.omega_m:
        raise ValueError("ponderomotive builder needs an underdamped resonator")
    kappa = params.kappa_total
    w = math.sqrt(params.omega_m**2 - params.gamma_m**2 / 4)
    a = np.zeros((4, 4))
    a[U1, U1] = a[U2, U2] = -kappa / 2
    a[U2, X1] = 2 * g
    a[X1, X1] = a[X2, X2] = -params.gamma_m / 2
    a[X1, X2] = w
    a[X2, X1] = -w
    a[X2, U1] = 2 * g
    channels = _optical_channels(params.kappa_out, 0.0) + _mechanical_channels(params.gamma_m)
    blocks = [vacuum_correlator(), thermal_correlator(params.n_th)]
    return _assemble(a, channels, blocks, params, drives, meta={"mechanical_frequency": w})


def build_measurement(params: PhysParams, drives: DriveConfig, signal: MeasurementSignal):
    """Dissipative model plus the static force ``-sqrt(2) A0 z`` on ``U1``.

    The noise part is independent of ``z``; the returned drive vector is the
    deterministic force for the given signal value.
    """
    _require(drives, Scheme.MEASUREMENT)
    model = _dissipative_core(params, drives)
    force = np.zeros(4)
    force[U1] = -math.sqrt(2.0) * drives.a_zero * signal.z
    return model, force


def linear_cavity(params: PhysParams, a_zero: float = 0.0) -> LtiModel:
    """Cavity with every optomechanical coupling switched off (``g0 -> 0``)."""
    return _dissipative_core(params, DriveConfig(a_zero=a_zero, scheme=Scheme.MEASUREMENT))


def build_model(params: PhysParams, drives: DriveConfig) -> LtiModel:
    """Dispatch on ``drives.scheme``; measurement models are built for ``z = 0``."""
    s = drives.scheme
    if s is Scheme.DISSIPATIVE:
        return build_dissipative(params, drives)
    if s is Scheme.PONDEROMOTIVE:
        return build_ponderomotive(params, drives)
    if s is Scheme.DISSIPATIVE_LOSSY:
        return build_lossy(params, drives)
    if s is Scheme.DISSIPATIVE_PHASE_NOISE:
        return build_phase_noise(params, drives)
    if s is Scheme.MEASUREMENT:
        return build_measurement(params, drives, MeasurementSignal(0.0))[0]
    raise ValueError(s)


# -- stability ---------------------------------------------------------------


class Stability(str, enum.Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


def classify_eigenvalues(eigs, eps: float = EPS_STAB) -> Stability:
    re = np.real(np.asarray(eigs))
    if np.any(re > eps):
        return Stability.UNSTABLE
    if np.any(re >= -eps):
        return Stability.MARGINAL
    return Stability.STABLE


def stability_check(model: LtiModel, eps: float = EPS_STAB) -> Stability:
    return classify_eigenvalues(np.linalg.eigvals(model.drift), eps)


def model_for(params: PhysParams, drives: DriveConfig, *, allow_unstable: bool = False) -> LtiModel:
    """Like :func:`build_model` but optionally skips the ``g_plus <= g_minus`` guard.

    Only used to probe the unstable region.
    """
    if not allow_unstable or drives.g_plus <= drives.g_minus:
        return build_model(params, drives)
    drift = _dissipative_drift(params.kappa_total, params.gamma_m, drives.g_minus, drives.g_plus)
    safe = drives.replace(g_plus=drives.g_minus)
    return build_model(params, safe).with_drift(drift)
