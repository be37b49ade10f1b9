"""
From a shot to a blowing-up solution
====================================

A compactly supported shot gives a density profile ``phi`` and its Newtonian
potential ``psi``. On the support the combination
``J = 2(d-1)/(d-2) phi**((d-2)/d) - psi - r**2/2`` must be constant, which is
a sharp test of the whole chain. Rescaling by ``s(t) = (d (T - t))**(1/d)``
turns the profile into a solution that concentrates at time ``T`` while
keeping its mass.
"""

import numpy as np

from pks_selfsimilar import build_profile, evaluate_solution, find_critical, make_params, solution_mass

params = make_params(3)
crit = find_critical(params)
table = build_profile(2 * crit.a_c, params, require_compact=True)
print(f"support radius {table.R_supp:.6f}, mu = {table.mu:.6f}, max |J + mu| = {table.max_J_dev:.2e}")
print(f"profile mass {table.mass:.8f} vs 8 Mcal(a) = {table.mphys:.8f}")

# Density at the centre grows like 1/(T - t); the mass does not change.
T = 1.0
for t in (0.0, 0.9, 0.99, 0.999):
    rho0 = evaluate_solution(table, T, t, 0.0).rho
    print(f"t = {t:5.3f}: rho(t, 0) = {rho0:12.4f}, rho(t, 0) (T - t) = {rho0 * (T - t):.6f},"
          f" mass = {solution_mass(table, T, t):.8f}")

# Below a_c the profile never vanishes and carries infinite mass.
open_table = build_profile(0.5, params)
print("a = 0.5 infinite mass:", open_table.infinite_mass, "| phi at the window edge:", np.round(open_table.phi[-1], 4))
