"""One-dimensional searches over frequency and cooperativity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .scenario import Scenario, drives_at, metric

__all__ = ["BracketError", "band_minimum", "threshold_cooperativity", "squeezing_at_cooperativity"]

_GRID_POINTS = 401


class BracketError(ValueError):
    def __init__(self, message, lo, hi, f_lo, f_hi):
        super().__init__(f"{message}: f({lo:.6g}) = {f_lo:.6g}, f({hi:.6g}) = {f_hi:.6g}")
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi


def band_minimum(scenario: Scenario, window, *, points: int = _GRID_POINTS, xrtol: float = 1e-8):
    """Locate the deepest squeezing inside ``window = (lo, hi)``.

    The gridded minimum is refined with a bounded Brent search on the two
    neighbouring grid cells.  Returns ``(omega_min, ratio_min)`` with the
    ratio normalized to shot noise.  When mirror minima tie (the spectra are
    even in ``omega`` for the symmetric schemes) the one with the smaller
    ``|omega|`` is kept and, failing that, the positive one.
    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise ValueError("window must have hi > lo")
    grid = np.linspace(lo, hi, points)
    vals = metric(scenario, grid)
    best = float(np.min(vals))
    ties = np.flatnonzero(vals <= best * (1 + 1e-12) + 1e-300)
    step = (hi - lo) / (points - 1)
    # |omega| compared in grid steps so that linspace rounding cannot break mirror ties
    i = int(max(ties, key=lambda j: (-round(abs(grid[j]) / step), grid[j])))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, points - 1)]
    scale = max(abs(grid[i]), (hi - lo) / points)
    res = optimize.minimize_scalar(
        lambda w: float(metric(scenario, [w])[0]),
        bounds=(a, b),
        method="bounded",
        options={"xatol": xrtol * scale},
    )
    if res.fun <= vals[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(vals[i])


def squeezing_at_cooperativity(scenario: Scenario, c: float, window=None) -> float:
    """Best squeezing ratio at cooperativity ``c``.

    With ``window`` the ratio is the band minimum inside it, otherwise the
    value at ``omega = 0``.
    """
    sc = scenario.with_drives(drives_at(scenario, c))
    if window is None:
        return float(metric(sc, [0.0])[0])
    return band_minimum(sc, window)[1]


@dataclass(frozen=True)
class Threshold:
    c_min: float
    ratio: float
    evaluations: int


def threshold_cooperativity(scenario: Scenario, target_ratio: float, *, window=None,
                            bracket=(1.0, 1e12), rtol: float = 1e-6) -> Threshold:
    """Smallest cooperativity whose squeezing ratio reaches ``target_ratio``.

    Root-finds ``ratio(C) - target`` in ``log C`` (the ratio falls
    monotonically with ``C`` for both schemes).  Drives are re-matched at
    every step.
    """
    if not 0 < target_ratio < 1:
        raise ValueError("target_ratio must lie in (0, 1)")
    count = 0

    def f(logc):
        nonlocal count
        count += 1
        return squeezing_at_cooperativity(scenario, math.exp(logc), window) - target_ratio

    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0 or f_hi > 0:
        raise BracketError("target not bracketed", bracket[0], bracket[1],
                           f_lo + target_ratio, f_hi + target_ratio)
    if f_lo == 0:
        return Threshold(bracket[0], target_ratio, count)
    logc = optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    c = math.exp(logc)
    ratio = f(logc) + target_ratio
    if abs(ratio - target_ratio) > rtol:
        raise BracketError("root refinement stalled", c, c, ratio, ratio)
    return Threshold(c, ratio, count)
