from dataclasses import replace

import numpy as np
import pytest

from tunnelsqueeze.calibrate import (
    CalibrationFit,
    FitConvergenceError,
    IllConditionedFitError,
    NoiseCurve,
    fit_drive_amplitude,
    fit_undriven,
    forward_model,
    levenberg_marquardt,
    synthesize_curve,
)
from tunnelsqueeze.constants import E_CHARGE, K_B, PLANCK
from tunnelsqueeze.noise import DriveParams, JunctionParams, ParameterError

F = 7.2e9
R = 70.0
GAIN = 1e7
AMP_NOISE = 2 * K_B * 3.0 / R  # 3 K amplifier, A^2/Hz
HW = PLANCK * F / E_CHARGE
BIASES = np.linspace(-3, 3, 241) * HW
J28 = JunctionParams(R, 0.028)


@pytest.fixture(scope="module")
def clean_fit():
    return fit_undriven(synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES))


def test_synthesize_exact_without_noise():
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES)
    np.testing.assert_array_equal(
        c.measured, forward_model(BIASES, F, R, GAIN, AMP_NOISE, 0.028))


def test_synthesize_deterministic():
    a = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES, 0.01, seed=7)
    b = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES, 0.01, seed=7)
    np.testing.assert_array_equal(a.measured, b.measured)


def test_synthesize_noise_statistics():
    b = np.linspace(-3, 3, 1000) * HW
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, b, 0.01, seed=3)
    model = forward_model(b, F, R, GAIN, AMP_NOISE, 0.028)
    rel = c.measured / model - 1
    assert 0.008 <= np.std(rel, ddof=1) <= 0.012


def test_undriven_roundtrip(clean_fit):
    assert clean_fit.gain == pytest.approx(GAIN, rel=1e-3)
    assert clean_fit.amp_noise == pytest.approx(AMP_NOISE, rel=1e-3)
    assert clean_fit.temperature == pytest.approx(0.028, rel=1e-3)
    assert clean_fit.amp_noise_temperature(R) == pytest.approx(3.0, rel=1e-3)
    assert clean_fit.rms_residual >= 0


def test_objective_decreases_monotonically(clean_fit):
    h = np.array(clean_fit.objective_history)
    assert h.size >= 2
    assert np.all(np.diff(h) < 0)


def test_zero_temperature_curve():
    c = synthesize_curve(JunctionParams(R, 0.0), DriveParams(F), GAIN, AMP_NOISE, BIASES)
    assert fit_undriven(c).temperature < 1e-3


def test_scaling_equivariance():
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES, 0.01, seed=11)
    scaled = NoiseCurve(c.bias, 37.5 * c.measured, c.frequency, c.resistance)
    a, b = fit_undriven(c), fit_undriven(scaled)
    assert b.gain == pytest.approx(37.5 * a.gain, rel=1e-6)
    assert b.temperature == pytest.approx(a.temperature, rel=1e-6)
    assert b.amp_noise == pytest.approx(a.amp_noise, rel=1e-6)


def test_noisy_fit_residual_matches_injected_level():
    b = np.linspace(-3, 3, 4001) * HW
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, b, 0.01, seed=5)
    fit = fit_undriven(c)
    rel_rms = fit.rms_residual / np.sqrt(np.mean(c.measured**2))
    assert 0.009 < rel_rms < 0.011
    assert fit.gain == pytest.approx(GAIN, rel=0.05)
    assert fit.amp_noise == pytest.approx(AMP_NOISE, rel=0.05)
    assert set(fit.covariance_diag) == {"gain", "amp_noise", "temperature"}
    assert all(v > 0 for v in fit.covariance_diag.values())


def test_initial_guess_is_accepted(clean_fit):
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES)
    fit = fit_undriven(c, initial=(2 * GAIN, 0.5 * AMP_NOISE, 0.1))
    assert fit.temperature == pytest.approx(0.028, rel=1e-3)
    assert fit_undriven(c, initial=clean_fit).gain == pytest.approx(GAIN, rel=1e-6)


def test_insufficient_span():
    narrow = np.linspace(-1.5, 1.5, 50) * HW
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, narrow)
    with pytest.raises(IllConditionedFitError):
        fit_undriven(c)


def test_nonconvergence_carries_best_iterate():
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES, 0.01, seed=1)
    with pytest.raises(FitConvergenceError) as err:
        fit_undriven(c, initial=(3 * GAIN, 2 * AMP_NOISE, 0.2), max_iter=1)
    best = err.value.best
    assert isinstance(best, CalibrationFit)
    assert not best.converged
    assert best.objective_history[-1] < best.objective_history[0]


@pytest.mark.parametrize("p, v_ac", [(1, 46e-6), (2, 36e-6)])
def test_drive_amplitude_roundtrip(clean_fit, p, v_ac):
    d = DriveParams(F, p, ac_amplitude=v_ac)
    c = synthesize_curve(J28, d, GAIN, AMP_NOISE, BIASES)
    fit = fit_drive_amplitude(c, clean_fit, d.drive_frequency)
    assert fit.v_ac == pytest.approx(v_ac, rel=5e-3)
    assert fit.gain == clean_fit.gain
    assert "v_ac" in fit.covariance_diag


def test_drive_amplitude_zero(clean_fit):
    c = synthesize_curve(J28, DriveParams(F, 1), GAIN, AMP_NOISE, BIASES)
    fit = fit_drive_amplitude(c, clean_fit, 2 * F)
    assert fit.v_ac < 0.1e-6


def test_drive_amplitude_rejects_bad_frequency(clean_fit):
    c = synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES)
    with pytest.raises(ParameterError):
        fit_drive_amplitude(c, clean_fit, 3 * F)


def test_curve_validation():
    b = np.linspace(-1, 1, 8)
    with pytest.raises(ParameterError):
        NoiseCurve(b[:5], np.ones(5), F, R)
    with pytest.raises(ParameterError):
        NoiseCurve(b[::-1], np.ones(8), F, R)
    with pytest.raises(ParameterError):
        NoiseCurve(b, -np.ones(8), F, R)
    with pytest.raises(ParameterError):
        NoiseCurve(b, np.ones(8), 0.0, R)
    with pytest.raises(ParameterError):
        synthesize_curve(J28, DriveParams(F), GAIN, AMP_NOISE, BIASES, noise_level=-1)


def test_lm_on_linear_problem():
    x_true = np.array([2.0, -1.0])
    t = np.linspace(0, 1, 20)

    def res(x):
        return x[0] * t + x[1] - (x_true[0] * t + x_true[1])

    out = levenberg_marquardt(res, [0.0, 0.0])
    assert out.converged
    np.testing.assert_allclose(out.x, x_true, atol=1e-8)
    assert all(np.diff(out.history) < 0)


def test_fit_dict_roundtrip(clean_fit):
    again = CalibrationFit.from_dict(clean_fit.to_dict())
    assert again == replace(clean_fit, objective_history=())
