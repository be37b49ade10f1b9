"""
The admissible mass window
==========================

For ``a > a_c`` the profile has compact support and finite mass. As ``a``
grows the mass decreases towards the Lane-Emden limit, so the physical
masses of self-similar solutions fill ``(M_c, M_2]``.
"""

from pks_selfsimilar import default_grid, find_critical, lane_emden, make_params, scan, thresholds

params = make_params(3)
crit = find_critical(params)
lane = lane_emden(params)
print(f"Lane-Emden first zero z1 = {lane.z1:.10f}, limit mass Mcal_c = {lane.mcal_limit:.8f}")

# A coarse log grid already shows the shape of the curve.
curve = scan(params, default_grid(crit.a_hi, 12), lane=lane, a_c=crit.a_hi)
print(f"{'a':>12} {'R(a)':>10} {'a R(a)':>10} {'Mcal(a)':>14}")
for pt in curve.points:
    print(f"{pt.a:12.4f} {pt.R:10.6f} {pt.scaled_R:10.6f} {pt.mcal:14.8f}")

# The scaled radius a R(a) tends to z1 (the exponent (p-1)/2 is 1 at d = 3).
m_c, m_2 = thresholds(curve, lane, params)
print(f"R decreasing: {curve.R_decreasing}")
print(f"physical window: M_c = {m_c:.6f} < M_2 = {m_2:.6f} (largest mass near a = {curve.a_at_max:.6f})")
