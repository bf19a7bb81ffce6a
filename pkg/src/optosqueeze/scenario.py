"""Scenario description, config parsing and spectrum evaluation.

A config file is either JSON or flat ``key = value`` text.  Keys are the
field names of :class:`~optosqueeze.model.PhysParams` and
:class:`~optosqueeze.model.DriveConfig` plus the scenario keys below::

    # comment
    scheme    = dissipative      # dissipative | ponderomotive | lossy | phase_noise | measurement
    omega_m   = 1e3
    kappa_out = 1
    gamma_m   = 2e-5
    n_th      = 10
    c         = 1e5              # red-drive cooperativity; with auto_match the blue drive is matched
    auto_match = true
    omega_min = -5
    omega_max = 5
    points    = 201
    spacing   = linear           # linear | log
    solver    = rwa              # rwa | floquet
    n_harm    = 4

``g_minus``/``g_plus`` may be given directly instead of ``c``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import floquet, linres
from .model import (
    DriveConfig,
    LtiModel,
    PhysParams,
    Scheme,
    build_model,
    kappa_tilde,
    matched_drives,
)

__all__ = [
    "ConfigError",
    "Grid",
    "Scenario",
    "Evaluation",
    "parse_config_text",
    "load_scenario",
    "scenario_from_mapping",
    "evaluate",
]

_PARAM_KEYS = {f.name for f in fields(PhysParams)}
_DRIVE_KEYS = {f.name for f in fields(DriveConfig)}
_SCENARIO_KEYS = {"c", "auto_match", "omega_min", "omega_max", "points", "spacing", "solver", "n_harm"}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}
_SCHEME_ALIASES = {"lossy": "dissipative_lossy", "phase_noise": "dissipative_phase_noise"}


class ConfigError(ValueError):
    """Invalid scenario description; the message names the offending key."""


@dataclass(frozen=True)
class Grid:
    omega_min: float = -1.0
    omega_max: float = 1.0
    points: int = 201
    spacing: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError("points: grid needs at least 2 points")
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise ConfigError("omega_min/omega_max must be finite")
        if self.omega_max <= self.omega_min:
            raise ConfigError("omega_max must exceed omega_min")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing: expected 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and self.omega_min <= 0:
            raise ConfigError("omega_min: log spacing needs a positive lower bound")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.points)
        return np.linspace(self.omega_min, self.omega_max, self.points)


@dataclass(frozen=True)
class Scenario:
    params: PhysParams
    drives: DriveConfig
    grid: Grid = field(default_factory=Grid)
    solver: str = "rwa"
    n_harm: int = floquet.DEFAULT_HARMONICS

    def __post_init__(self):
        if self.solver not in ("rwa", "floquet"):
            raise ConfigError(f"solver: expected 'rwa' or 'floquet', got {self.solver!r}")
        if not floquet.MIN_HARMONICS <= self.n_harm < floquet.MAX_HARMONICS:
            raise ConfigError(
                f"n_harm: expected {floquet.MIN_HARMONICS} <= n_harm < {floquet.MAX_HARMONICS}, got {self.n_harm}"
            )

    def model(self) -> LtiModel:
        return build_model(self.params, self.drives)

    def with_drives(self, drives: DriveConfig) -> "Scenario":
        return replace(self, drives=drives)


def _coerce(key: str, raw):
    if isinstance(raw, str):
        text = raw.strip()
    else:
        text = raw
    try:
        if key in ("scheme", "spacing", "solver"):
            value = str(text).lower()
            return _SCHEME_ALIASES.get(value, value) if key == "scheme" else value
        if key == "auto_match":
            if isinstance(text, bool):
                return text
            return _BOOL[str(text).lower()]
        if key in ("points", "n_harm"):
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        value = float(text)
    except (KeyError, ValueError, TypeError):
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from None
    return value


def parse_config_text(text: str) -> dict:
    """Parse JSON (if the text starts with ``{``) or ``key = value`` lines."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"{key}: given twice")
        out[key] = value
    return out


def _drives_from(values: dict, params: PhysParams, scheme: str) -> DriveConfig:
    extra = {k: values[k] for k in ("g_zero", "a_zero") if k in values}
    auto = values.get("auto_match", False)
    if auto or "c" in values:
        if "g_minus" in values or "g_plus" in values:
            raise ConfigError("c: give either c or g_minus/g_plus, not both")
        if "c" not in values:
            raise ConfigError("c: auto_match needs a cooperativity")
        c = values["c"]
        if auto:
            if c < 1:
                raise ConfigError(f"c: auto-match needs c >= 1, got {c!r}")
            drives = matched_drives(params, c, scheme, **extra)
            kt = kappa_tilde(params, drives) / params.kappa_total
            # g_plus is stored to one ulp, which limits kappa_tilde to ~eps*c
            if abs(kt - 1) > 1e-12 + 4 * np.finfo(float).eps * c:
                raise ConfigError(f"c: matching failed (kappa_tilde/kappa = {kt!r})")
        else:
            if c < 0:
                raise ConfigError("c: cooperativity must be non-negative")
            g = math.sqrt(c * params.kappa_total * params.gamma_m / 4.0)
            drives = DriveConfig(g_minus=g, scheme=scheme, **extra)
    else:
        drive_vals = {k: values[k] for k in ("g_minus", "g_plus") if k in values}
        drives = DriveConfig(scheme=scheme, **drive_vals, **extra)
    return drives


def scenario_from_mapping(raw: dict) -> Scenario:
    """Validate a parsed config and build the :class:`Scenario`."""
    allowed = _PARAM_KEYS | _DRIVE_KEYS | _SCENARIO_KEYS
    values = {}
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError(f"{key}: unknown key")
        values[key] = _coerce(key, value)

    try:
        params = PhysParams(**{k: values[k] for k in _PARAM_KEYS if k in values})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    scheme = values.get("scheme", "dissipative")
    try:
        Scheme.parse(scheme)
    except ValueError:
        raise ConfigError(f"scheme: unknown scheme {scheme!r}") from None
    try:
        drives = _drives_from(values, params, scheme)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"drives: {exc}") from None
    if drives.g_plus > drives.g_minus:
        raise ConfigError(
            f"g_plus: g_plus={drives.g_plus!r} exceeds g_minus={drives.g_minus!r}; the system is unstable"
        )

    grid_vals = {k: values[k] for k in ("omega_min", "omega_max", "points", "spacing") if k in values}
    grid = Grid(**grid_vals)
    solver = values.get("solver", "rwa")
    n_harm = values.get("n_harm", floquet.DEFAULT_HARMONICS)
    scenario = Scenario(params, drives, grid, solver, n_harm)
    try:
        scenario.model()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return scenario


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    return scenario_from_mapping(parse_config_text(text))


@dataclass(frozen=True)
class Evaluation:
    spectra: linres.Spectra
    solver: str
    converged: np.ndarray  # bool per row


def evaluate(scenario: Scenario, omegas=None, *, strict: bool = False) -> Evaluation:
    """Spectra of ``scenario`` on its grid (or on ``omegas``).

    The Floquet solver is run point by point so that a non-converged point
    only flags its own row.
    """
    w = scenario.grid.values() if omegas is None else np.atleast_1d(np.asarray(omegas, dtype=float))
    model = scenario.model()
    if scenario.solver == "rwa":
        return Evaluation(linres.spectra(model, w), "rwa", np.ones(w.size, dtype=bool))
    fm = floquet.lift(model, n_harm=scenario.n_harm)
    res = floquet.floquet_spectra(fm, w, strict=strict)
    flags = np.full(w.size, res.converged)
    return Evaluation(res.spectra, "floquet", flags)


def metric_name(scenario: Scenario) -> str:
    """Squeezing figure of merit: optimal quadrature for the ponderomotive scheme."""
    return "s_opt" if scenario.drives.scheme is Scheme.PONDEROMOTIVE else "s_u1"


def metric(scenario: Scenario, omegas) -> np.ndarray:
    """Figure of merit normalized to shot noise."""
    ev = evaluate(scenario, omegas, strict=True)
    return getattr(ev.spectra, metric_name(scenario)) / linres.SHOT_NOISE


def drives_at(scenario: Scenario, c: float) -> DriveConfig:
    """Drives of ``scenario`` rescaled to cooperativity ``c``.

    Two-tone schemes are re-matched; the ponderomotive drive just sets ``G``.
    """
    d = scenario.drives
    extra = {"g_zero": d.g_zero, "a_zero": d.a_zero} if d.scheme is Scheme.MEASUREMENT else {}
    if d.scheme is Scheme.PONDEROMOTIVE:
        p = scenario.params
        return DriveConfig(g_minus=math.sqrt(c * p.kappa_total * p.gamma_m / 4.0), scheme=d.scheme)
    return matched_drives(scenario.params, c, d.scheme, **extra)

