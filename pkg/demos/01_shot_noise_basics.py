"""
Shot noise of an undriven tunnel junction
=========================================

Zero-frequency shot noise, its finite-frequency version, and the vacuum
plateau. Everything is in reduced units: bias in hbar*omega/e, noise in
hbar*omega/R.
"""

import numpy as np

from tunnelsqueeze import DriveParams, JunctionParams, noise_temperature, s0, s_finite_freq
from tunnelsqueeze import to_reduced, vacuum_noise

# %%
# At T = 0 the zero-frequency noise is just |v|; temperature rounds the
# kink at v = 0 up to the Johnson-Nyquist value 2 theta_T.
v = np.linspace(-2, 2, 9)
for theta in (0.0, 0.081, 0.3):
    print(f"theta_T={theta:5.3f}  S0:", np.round(s0(v, theta), 4))

# %%
# Measured at frequency omega, the junction noise is flat for |u| < 1:
# no photon can be emitted and what remains is vacuum noise.
u = np.linspace(-3, 3, 13)
print("S(u, T=0):", s_finite_freq(u, 0.0))

# %%
# The experiment: 70 ohm, 28 mK, 7.2 GHz.
junction = JunctionParams(resistance=70.0, electron_temperature=0.028)
drive = DriveParams(measurement_frequency=7.2e9)
point = to_reduced(junction, drive)
print(f"theta_T = {point.theta_T:.4f}")
print(f"vacuum level at 28 mK = {vacuum_noise(point.theta_T):.8f} hbar*omega/R")
print(f"T_vac = {noise_temperature(1.0, junction, drive) * 1e3:.1f} mK")
