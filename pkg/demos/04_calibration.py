"""
Calibrating gain, amplifier noise and temperature
=================================================

A synthetic undriven curve stands in for a measurement. Fitting it gives
G, S_amp and T; a second curve with a detuned drive then gives V_ac.
"""

import numpy as np

from tunnelsqueeze import DriveParams, JunctionParams, fit_drive_amplitude, fit_undriven
from tunnelsqueeze import synthesize_curve
from tunnelsqueeze.constants import E_CHARGE, K_B, PLANCK

f = 7.2e9
junction = JunctionParams(70.0, 0.028)
gain = 1e7
amp_noise = 2 * K_B * 3.0 / 70.0  # a 3 K amplifier
biases = np.linspace(-3, 3, 4001) * PLANCK * f / E_CHARGE

undriven = synthesize_curve(junction, DriveParams(f), gain, amp_noise, biases,
                            noise_level=0.01, seed=1)
fit = fit_undriven(undriven)
print(f"G     = {fit.gain:.4g}  (+/- {np.sqrt(fit.covariance_diag['gain']):.2g})")
print(f"T_amp = {fit.amp_noise_temperature(70.0):.4f} K")
print(f"T     = {fit.temperature * 1e3:.1f} mK (+/- "
      f"{np.sqrt(fit.covariance_diag['temperature']) * 1e3:.1f} mK)")

# %%
drive = DriveParams(f, harmonic_p=1, ac_amplitude=46e-6)
driven = synthesize_curve(junction, drive, gain, amp_noise, biases, noise_level=0.01, seed=2)
fit_ac = fit_drive_amplitude(driven, fit, drive.drive_frequency)
print(f"V_ac  = {fit_ac.v_ac * 1e6:.2f} uV")
