"""
Best achievable squeezing
=========================

Searches bias and drive amplitude together. At T = 0 the answer does not
depend on frequency; at finite temperature it degrades, faster for p = 2
where the optimum sits on the thermally smeared zero-bias kink.
"""

from tunnelsqueeze import optimize_squeeze

for p in (1, 2):
    opt = optimize_squeeze(0.0, p)
    print(f"T=0, p={p}: ratio {opt.ratio:.4f} = {opt.db:.2f} dB "
          f"at u={opt.u_star:.3f}, z={opt.z_star:.4f} ({opt.evaluations} evaluations)")

# %%
print("\ntheta_T   p=1     p=2")
for theta in (0.0, 0.02, 0.04, 0.081, 0.15, 0.3):
    r1 = optimize_squeeze(theta, 1, grid=81).ratio
    r2 = optimize_squeeze(theta, 2, grid=81).ratio
    print(f"{theta:6.3f}  {r1:.4f}  {r2:.4f}")
