"""Exit criteria. Each test records a PASS/FAIL line shown in the pytest summary."""

import math
import time

import numpy as np
import pytest

from tunnelsqueeze.calibrate import fit_drive_amplitude, fit_undriven, synthesize_curve
from tunnelsqueeze.constants import E_CHARGE, K_B, PLANCK
from tunnelsqueeze.noise import (
    DriveParams,
    JunctionParams,
    harmonic_sums,
    noise_temperature,
    quadrature_variances,
    s_finite_freq,
    truncation_order,
    to_reduced,
    vacuum_noise,
)
from tunnelsqueeze.optimize import optimize_bias_at_fixed_drive, optimize_squeeze
from tunnelsqueeze.specfun import COTH_SERIES_CUTOFF, bessel_j, bessel_j_all, x_coth_x

import oracles
from acceptance_log import record

pytestmark = pytest.mark.acceptance

F = 7.2e9
R = 70.0
T_EL = 0.028
HW_OVER_E = PLANCK * F / E_CHARGE

GRID_U = np.linspace(-4, 4, 81)
GRID_Z = np.linspace(0, 4, 41)
GRID_THETA = (0.0, 0.04, 0.5)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_t0_four_wave_mixing_optimum():
    opt, dt = _timed(lambda: optimize_squeeze(0.0, 1))
    ok = (abs(opt.ratio - 0.62) <= 0.01 and abs(opt.u_star - 1.0) <= 0.02
          and abs(opt.db + 2.09) <= 0.05 and dt < 10)
    record(1, "T=0 p=1 optimum", ok,
           f"ratio {opt.ratio:.4f}, u* {opt.u_star:.4f}, {opt.db:.3f} dB, z* {opt.z_star:.4f}, "
           f"{dt:.2f} s")
    assert ok


def test_c02_t0_three_wave_mixing_optimum():
    opt, dt = _timed(lambda: optimize_squeeze(0.0, 2))
    ok = (abs(opt.ratio - 0.73) <= 0.01 and abs(opt.u_star) <= 0.02
          and abs(opt.db + 1.37) <= 0.05 and dt < 10)
    record(2, "T=0 p=2 optimum", ok,
           f"ratio {opt.ratio:.4f}, u* {opt.u_star:.2e}, {opt.db:.3f} dB, z* {opt.z_star:.4f}, "
           f"{dt:.2f} s")
    assert ok


def test_c03_experimental_p1_squeezing():
    def run():
        pt = to_reduced(JunctionParams(R, T_EL), DriveParams(F, 1, ac_amplitude=46e-6))
        return optimize_bias_at_fixed_drive(pt.z, pt.theta_T, 1)

    opt, dt = _timed(run)
    v_star = opt.u_star * HW_OVER_E
    ok = abs(opt.ratio - 0.74) <= 0.02 and abs(v_star - 30e-6) <= 3e-6 and dt < 5
    record(3, "28 mK, 46 uV, p=1", ok,
           f"ratio {opt.ratio:.4f} at V_dc {v_star * 1e6:.2f} uV, {dt:.2f} s")
    assert ok


def test_c04_experimental_p2_squeezing():
    def run():
        pt = to_reduced(JunctionParams(R, T_EL), DriveParams(F, 2, dc_bias=0.0,
                                                            ac_amplitude=36e-6))
        return quadrature_variances(pt)

    res, dt = _timed(run)
    ok = abs(res.squeeze_ratio - 0.82) <= 0.02 and dt < 5
    record(4, "28 mK, 36 uV, p=2 at V_dc=0", ok,
           f"ratio {res.squeeze_ratio:.4f} (target 0.82 +/- 0.02), {dt:.2f} s")
    assert ok


def test_c05_db_self_consistency():
    pairs = [(0.62, 2.09), (0.73, 1.37), (0.74, 1.31), (0.82, 0.86)]
    diffs = [abs(10 * math.log10(r) + db) for r, db in pairs]
    ok = max(diffs) <= 0.05
    record(5, "dB self-consistency", ok, "max |10 log10(ratio) - dB| = " f"{max(diffs):.4f}")
    assert ok


def test_c06_heisenberg_and_cauchy_schwarz_grid():
    def run():
        worst_h, worst_cs = np.inf, -np.inf
        for theta in GRID_THETA:
            vac2 = vacuum_noise(theta) ** 2
            for p in (1, 2):
                for z in GRID_Z:
                    s, x = harmonic_sums(GRID_U, z, theta, p)
                    worst_h = min(worst_h, np.min((s + x) * (s - x) - vac2))
                    worst_cs = max(worst_cs, np.max(np.abs(x) - s))
        return worst_h, worst_cs

    (worst_h, worst_cs), dt = _timed(run)
    ok = worst_h >= -1e-9 and worst_cs <= 1e-12 and dt < 30
    record(6, "Heisenberg / Cauchy-Schwarz grid", ok,
           f"min(var_a var_b - vac^2) {worst_h:.3e}, max(|X| - S~) {worst_cs:.3e}, {dt:.2f} s")
    assert ok


def test_c07_vacuum_plateau():
    u = np.linspace(-1, 1, 101)
    plateau = np.all(s_finite_freq(u, 0.0) == 1.0)
    t_vac = noise_temperature(1.0, JunctionParams(R, T_EL), DriveParams(F))
    ok = bool(plateau) and abs(t_vac - 0.173) <= 0.001
    record(7, "vacuum plateau", ok, f"plateau exact: {bool(plateau)}, T_vac {t_vac:.5f} K")
    assert ok


def test_c08_special_functions():
    norm_err = 0.0
    for z in (0.5, 1, 2, 5, 10, 30):
        v = bessel_j_all(z, math.ceil(z) + 40).values
        norm_err = max(norm_err, abs(v[0] ** 2 + 2 * np.sum(v[1:] ** 2) - 1))
    j_err = max(abs(bessel_j(n, 1.0) - float(oracles.bessel_series(n, 1))) for n in (0, 1))
    c = COTH_SERIES_CUTOFF
    coth_jump = abs(x_coth_x(c) - x_coth_x(np.nextafter(c, 0)))
    ok = norm_err < 1e-10 and j_err < 1e-12 and coth_jump < 1e-14
    record(8, "special functions", ok,
           f"normalization {norm_err:.1e}, J0/J1(1) {j_err:.1e}, x coth x jump {coth_jump:.1e}")
    assert ok


def test_c09_calibration_roundtrip():
    def run():
        j = JunctionParams(R, T_EL)
        gain, amp = 1e7, 2 * K_B * 3.0 / R
        truth = np.array([gain, amp, T_EL])
        clean = synthesize_curve(j, DriveParams(F), gain, amp,
                                 np.linspace(-3, 3, 241) * HW_OVER_E)
        fit = fit_undriven(clean)
        clean_err = np.abs(np.array([fit.gain, fit.amp_noise, fit.temperature]) / truth - 1)

        d = DriveParams(F, 1, ac_amplitude=46e-6)
        driven = synthesize_curve(j, d, gain, amp, np.linspace(-3, 3, 241) * HW_OVER_E)
        vac_err = abs(fit_drive_amplitude(driven, fit, d.drive_frequency).v_ac / 46e-6 - 1)

        # 40001 points over |u| <= 3: Fisher sigma_T ~ 4.4 % at 1 % per-point noise
        dense = np.linspace(-3, 3, 40001) * HW_OVER_E
        errs = []
        for seed in range(100):
            c = synthesize_curve(j, DriveParams(F), gain, amp, dense, 0.01, seed)
            f = fit_undriven(c)
            errs.append(np.abs(np.array([f.gain, f.amp_noise, f.temperature]) / truth - 1))
        return clean_err, vac_err, np.median(errs, axis=0)

    (clean_err, vac_err, median_err), dt = _timed(run)
    ok = (np.all(clean_err <= 1e-3) and vac_err <= 5e-3 and np.all(median_err < 0.05)
          and dt < 60)
    record(9, "calibration round-trip", ok,
           f"clean max err {clean_err.max():.1e}, V_ac err {vac_err:.1e}, "
           f"noisy median err G/S_amp/T {median_err[0]:.3f}/{median_err[1]:.3f}/"
           f"{median_err[2]:.3f}, {dt:.1f} s")
    assert ok


def test_c10_truncation_robustness():
    worst = 0.0
    for theta in GRID_THETA:
        for p in (1, 2):
            for z in GRID_Z:
                n = truncation_order(z, p)
                s1, x1 = harmonic_sums(GRID_U, z, theta, p, order=n)
                s2, x2 = harmonic_sums(GRID_U, z, theta, p, order=2 * n)
                for a, b in ((s1, s2), (x1, x2)):
                    rel = np.abs(b - a) / np.maximum(np.abs(a), 1.0)
                    worst = max(worst, float(np.max(rel)))
    ok = worst < 1e-12
    record(10, "truncation robustness", ok, f"max relative change {worst:.1e}")
    assert ok

