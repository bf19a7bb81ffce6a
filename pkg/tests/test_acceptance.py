"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers;
run ``pytest tests/test_acceptance.py -s`` to see them.
"""
import math

import numpy as np
import pytest

from optosqueeze import floquet as fq
from optosqueeze import oracle
from optosqueeze.linres import SHOT_NOISE, spectra, spectrum_point
from optosqueeze.measure import enhancement
from optosqueeze.model import (
    DriveConfig,
    PhysParams,
    Scheme,
    build_model,
    drives_from_squeezing,
    matched_drives,
)
from optosqueeze.scenario import Scenario
from optosqueeze.search import band_minimum, threshold_cooperativity


def report(number, title, checks):
    """Print one summary line and fail on the first failed sub-check.

    ``checks`` is a list of ``(label, ok, detail)``.
    """
    ok = all(c[1] for c in checks)
    details = "; ".join(f"{label}: {detail}{'' if good else ' [failed]'}" for label, good, detail in checks)
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {details}")
    failed = [label for label, good, _ in checks if not good]
    assert not failed, f"criterion {number} failed: {', '.join(failed)}"


def _g(params, c):
    return math.sqrt(c * params.kappa_total * params.gamma_m / 4.0)


def test_criterion_01_shot_noise_baseline():
    omega_m = 1.0
    w = np.linspace(-5 * omega_m, 5 * omega_m, 200)
    base = PhysParams(omega_m=omega_m, kappa_out=1.0, gamma_m=1e-3, n_th=10.0)
    models = {
        "dissipative": build_model(base, DriveConfig()),
        "lossy": build_model(base.replace(kappa_out=0.7, kappa_int=0.3), DriveConfig(scheme=Scheme.DISSIPATIVE_LOSSY)),
        "phase_noise": build_model(base.replace(g0=1e-3, gamma_l=1e-2), DriveConfig(scheme=Scheme.DISSIPATIVE_PHASE_NOISE)),
        "measurement": build_model(base, DriveConfig(scheme=Scheme.MEASUREMENT)),
    }
    checks = []
    for name, model in models.items():
        sp = spectra(model, w)
        fl = fq.floquet_spectra(fq.lift(model), w).spectra if name != "phase_noise" else sp
        err = max(
            float(np.max(np.abs(s.s_u1 - 0.5))) for s in (sp, fl)
        )
        err = max(err, max(float(np.max(np.abs(s.s_u2 - 0.5))) for s in (sp, fl)))
        err = max(err, max(float(np.max(np.abs(s.s_u12))) for s in (sp, fl)))
        checks.append((name, err <= 1e-12, f"max dev {err:.1e}"))
    report(1, "shot-noise baseline", checks)


def test_criterion_02_resonance_formula():
    worst = 0.0
    for kt in (0.25, 0.5, 1.0, 2.0, 4.0):
        for r in (0.0, 1.0, 3.0):
            for n_th in (0.0, 10.0):
                p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=1e-3, n_th=n_th)
                d = drives_from_squeezing(math.sqrt(kt * p.gamma_m / 4.0), r)
                got = spectrum_point(build_model(p, d), 0.0).s_u1 / SHOT_NOISE
                ref = oracle.s_u1_resonance(1.0, kt, n_th, r)
                worst = max(worst, abs(got - ref) / ref)
    report(2, "resonance formula", [("30-point grid", worst < 1e-9, f"max rel err {worst:.1e}")])


def _fig2_point():
    p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    return spectrum_point(build_model(p, matched_drives(p, 1e5)), 0.0)


def test_criterion_03_matched_squeezing():
    ratio = _fig2_point().s_u1 / SHOT_NOISE
    exact = 21 * oracle.matched_exp_minus_2r(1e5)
    checks = [
        ("vs 21 exp(-2r)", abs(ratio / exact - 1) < 1e-9, f"{ratio:.6e} vs {exact:.6e}"),
        ("vs 5.25e-5", abs(ratio / 5.25e-5 - 1) < 1e-3, f"rel dev {abs(ratio / 5.25e-5 - 1):.1e}"),
    ]
    report(3, "matched squeezing", checks)


def test_criterion_04_purity():
    n_eff = _fig2_point().n_eff
    ok = n_eff is not None and abs(n_eff - 10.0) < 1e-9
    report(4, "purity", [("n_eff[0]", ok, f"{n_eff!r}")])


def test_criterion_05_strong_coupling():
    p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=0.1, n_th=0.0)
    sc = Scenario(p, drives_from_squeezing(0.5, 8.0))
    w_pos, s_pos = band_minimum(sc, (0.0, 1.0))
    w_neg, _ = band_minimum(sc, (-1.0, 0.0))
    eq = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=1.0, n_th=0.0)
    _, s_eq = band_minimum(Scenario(eq, drives_from_squeezing(0.5, 8.0)), (-1.0, 1.0))
    checks = [
        ("omega +", abs(w_pos - 0.351781) < 1e-4, f"{w_pos:.6f}"),
        ("omega -", abs(w_neg + 0.351781) < 1e-4, f"{w_neg:.6f}"),
        ("S_min vs 0.585508", abs(s_pos / 0.585508 - 1) < 1e-2, f"{s_pos:.6f}"),
        ("equal damping", s_eq < 1e-6, f"{s_eq:.3e}"),
    ]
    report(5, "strong coupling", checks)


def test_criterion_06_ponderomotive():
    kappa, omega_m = 1.0, 10.0
    p = PhysParams(omega_m=omega_m, kappa_out=kappa, gamma_m=1e-4, n_th=0.0)
    g = 0.1
    model = build_model(p, DriveConfig(g_minus=g, scheme=Scheme.PONDEROMOTIVE))
    w = np.linspace(-2 * omega_m, 2 * omega_m, 4001)
    sp = spectra(model, w)
    flat = float(np.max(np.abs(sp.s_u1 - 0.5)))
    peak = float(np.max(np.abs(sp.s_u12)))
    side = spectra(model, [omega_m, -omega_m]).s_u12
    cross = float(np.max(np.abs(side)))
    deficit = 1 - spectrum_point(model, 0.0).s_opt / SHOT_NOISE
    target = 16 * g**2 / (kappa * omega_m)
    checks = [
        ("S_U1 flat", flat <= 1e-12, f"max dev {flat:.1e}"),
        ("S_U1U2[+-Omega]", cross <= 1e-10 * peak, f"{cross:.1e} vs peak {peak:.3e}"),
        ("deficit", abs(deficit / target - 1) < 0.1, f"{deficit:.5f} vs {target:.3f}"),
    ]
    report(6, "ponderomotive", checks)


def test_criterion_07_floquet_limits():
    good = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    model = build_model(good, matched_drives(good, 1e3))
    rwa = spectrum_point(model, 0.0).s_u1
    full = fq.floquet_spectrum(fq.lift(model), 0.0, "u1")
    diff = abs(full - rwa) / rwa
    bad = PhysParams(omega_m=20.0, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    fm = fq.lift(build_model(bad, matched_drives(bad, 1e7)))
    floor = fq.floquet_spectrum(fm, 0.0, "u1") / SHOT_NOISE
    conv = fq.check_convergence(fm, 0.0, "u1", n_harm=4).rel_diff
    checks = [
        ("kappa/Omega = 1e-3", diff < 1e-4, f"rel diff {diff:.1e}"),
        ("floor", abs(floor / 7.8125e-5 - 1) < 0.25, f"{floor:.4e} vs 7.8125e-05"),
        ("N=4 vs 5", conv < 1e-6, f"{conv:.1e}"),
    ]
    report(7, "Floquet limits", checks)


def test_criterion_08_measurement():
    p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    worst = 0.0
    for c in (1e2, 1e3, 1e4):
        got = enhancement(p, c, 1.0).ratio
        ref, _ = oracle.measurement_enhancement(10.0, c=c)
        worst = max(worst, abs(got / ref - 1))
    f4 = PhysParams(omega_m=1.0, kappa_out=0.05, gamma_m=2e-6, n_th=10.0)
    e6 = enhancement(f4, 1e6, 1e-3, solver="floquet")
    bound = 8 / 0.05**2
    cs = np.geomspace(1.0, 1e8, 33)
    curve = np.array([enhancement(f4, c, 1.0, solver="floquet").ratio for c in cs])
    k = int(np.argmax(curve))
    checks = [
        ("RWA vs exp(2r)/84", worst < 1e-6, f"max rel err {worst:.1e}"),
        ("C=1e6, C0=1e-3", 0.5 < e6.ratio / bound < 2 and e6.converged, f"{e6.ratio:.1f} vs {bound:.0f}"),
        ("interior maximum at C0=1", 0 < k < cs.size - 1, f"peak {curve[k]:.1f} at C={cs[k]:.3g}"),
    ]
    report(8, "measurement enhancement", checks)


def test_criterion_09_internal_loss():
    worst = 0.0
    for frac in (0.0, 0.25, 0.5, 1.0):
        for r in (0.0, 2.0, 8.0):
            for n_th in (0.0, 10.0):
                p = PhysParams(omega_m=1e3, kappa_out=1.0 - frac, kappa_int=frac, gamma_m=1e-3, n_th=n_th)
                d = drives_from_squeezing(math.sqrt(p.kappa_total * p.gamma_m / 4.0), r, Scheme.DISSIPATIVE_LOSSY)
                got = spectrum_point(build_model(p, d), 0.0).s_u1 / SHOT_NOISE
                ref = oracle.lossy_resonance(p.kappa_out, p.kappa_int, n_th, r)
                worst = max(worst, abs(got - ref) / ref)
    frac = 0.25
    p = PhysParams(omega_m=1e3, kappa_out=1 - frac, kappa_int=frac, gamma_m=1e-3)
    d = drives_from_squeezing(math.sqrt(p.gamma_m / 4.0), 8.0, Scheme.DISSIPATIVE_LOSSY)
    got = spectrum_point(build_model(p, d), 0.0).s_u1 / SHOT_NOISE
    approx = frac + (1 - frac) * 1.12e-7
    checks = [
        ("24-point grid", worst < 1e-9, f"max rel err {worst:.1e}"),
        ("r=8 value", abs(got - approx) < 1e-6, f"{got:.9f} vs {approx:.9f}"),
    ]
    report(9, "internal loss", checks)


def test_criterion_10_phase_noise():
    worst = 0.0
    g0, gamma_m, r = 1e-3, 1e-3, 2.0
    for ratio in (0.0, 1.0, 21.0):
        for n_th in (0.0, 10.0):
            gamma_l = ratio * g0**2 / gamma_m
            p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=gamma_m, n_th=n_th, g0=g0, gamma_l=gamma_l)
            d = drives_from_squeezing(math.sqrt(p.gamma_m / 4.0), r, Scheme.DISSIPATIVE_PHASE_NOISE)
            got = spectrum_point(build_model(p, d), 0.0).s_u1 / SHOT_NOISE
            ref = oracle.phase_noise_resonance(n_th, r, gamma_m, gamma_l, g0)
            worst = max(worst, abs(got - ref) / ref)
    report(10, "laser phase noise", [("6-point grid", worst < 1e-9, f"max rel err {worst:.1e}")])


def test_criterion_11_thresholds():
    p = PhysParams(omega_m=1e3, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    diss = threshold_cooperativity(Scenario(p, matched_drives(p, 1.0)), 0.5).c_min
    ps_p = PhysParams(omega_m=10.0, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    ps = Scenario(ps_p, DriveConfig(g_minus=_g(ps_p, 1.0), scheme=Scheme.PONDEROMOTIVE))
    half = 20 * ps_p.gamma_m
    side = threshold_cooperativity(ps, 0.5, window=(ps_p.omega_m - half, ps_p.omega_m + half)).c_min
    bound = oracle.ps_cmin(ps_p.omega_m, ps_p.gamma_m, ps_p.n_th).value
    checks = [
        ("dissipative 3 dB", abs(diss - 11.006) <= 0.01, f"{diss:.5f}"),
        ("PS near sideband vs ps_cmin", 0.5 <= side / bound <= 2, f"{side:.1f} vs {bound:.1f}"),
    ]
    report(11, "thresholds", checks)
