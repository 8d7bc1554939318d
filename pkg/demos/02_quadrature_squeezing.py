"""
Quadrature noise under ac drive
===============================

Sweeps the dc bias with the drive on, for the two drive frequencies used
in the experiment: omega_0 = 2 omega (p = 1) and omega_0 = omega (p = 2).
Shows S, the phase-averaged S~, and both quadratures.
"""

import numpy as np

from tunnelsqueeze import DriveParams, JunctionParams, SweepSpec, sweep
from tunnelsqueeze.optimize import undriven_curve

junction = JunctionParams(70.0, 0.028)

for p, v_ac in ((1, 46e-6), (2, 36e-6)):
    spec = SweepSpec("dc_bias", -120e-6, 120e-6, 241, junction,
                     DriveParams(7.2e9, harmonic_p=p, ac_amplitude=v_ac))
    rows = sweep(spec)
    s_plain = undriven_curve(spec)
    volts = np.array([a for a, _ in rows])
    var_a = np.array([r.var_a for _, r in rows])
    var_b = np.array([r.var_b for _, r in rows])
    s_tilde = np.array([r.s_tilde for _, r in rows])
    ratio = np.array([r.squeeze_ratio for _, r in rows])

    i = np.argmin(ratio)
    print(f"p={p}, V_ac={v_ac * 1e6:.0f} uV: best ratio {ratio[i]:.3f} "
          f"({10 * np.log10(ratio[i]):.2f} dB) at V_dc = {volts[i] * 1e6:.1f} uV")
    squeezed = volts[ratio < 1]
    print(f"  squeezing window: {squeezed.min() * 1e6:.1f} .. {squeezed.max() * 1e6:.1f} uV")

    # %%
    # optional figure
    try:
        import matplotlib.pyplot as plt
    except ImportError:
        continue
    plt.figure()
    plt.plot(volts * 1e6, s_plain, label="S")
    plt.plot(volts * 1e6, s_tilde, label="S~")
    plt.plot(volts * 1e6, var_a, label="var A")
    plt.plot(volts * 1e6, var_b, label="var B")
    plt.axhline(1.0, ls=":", c="k")
    plt.xlabel("V_dc [uV]")
    plt.ylabel("noise [hbar omega / R]")
    plt.legend()
    plt.savefig(f"quadratures_p{p}.png", dpi=120)
