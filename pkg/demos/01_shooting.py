"""
Shooting the profile equation
=============================

Every radial profile starts from a height ``a = u(0)``. Small heights give
solutions that oscillate around the stationary value 1 and never reach
zero; large heights dive through zero at a finite radius. This script
integrates a few shots and prints where their extrema and zeros fall.
"""

import numpy as np

from pks_selfsimilar import DEFAULT_CONTROLS, StopRule, integrate, make_params
from pks_selfsimilar.ode import DU_ZERO, U_ZERO_DOWN, U_ZERO_UP

params = make_params(3)
controls = DEFAULT_CONTROLS.replace(r_max=10.0)

# Integrate each height out to r = 10, passing through any zeros of u.
for a in (0.2, 1.0, 3.0, 7.0, 50.0):
    traj = integrate(a, params, controls, StopRule.until_rmax())
    zeros = [f"{e.r:.3f}{'v' if e.kind == U_ZERO_DOWN else '^'}"
             for e in traj.events_of(U_ZERO_DOWN, U_ZERO_UP)]
    extrema = [e.state.u for e in traj.events_of(DU_ZERO)][:4]
    print(f"a = {a:5.1f}: zeros of u at {zeros or 'none'}")
    print(f"           first extrema of u: {np.round(extrema, 4).tolist()}")

# The height 1 is a fixed point: the shot never leaves u = 1.
flat = integrate(1.0, params, controls, StopRule.until_rmax())
print("sup |u - 1| for a = 1:", np.max(np.abs(flat.y[:, 0] - 1.0)))
