"""Invariant checks run by ``pks-selfsimilar verify``.

Each check returns a :class:`CheckResult`; a failing check carries the first
counterexample found. Thresholds are stated for the default tolerance
``rel_tol = 1e-10`` and are loosened in proportion when a coarser
tolerance is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import lane_emden
from .mass import mass_point
from .ode import DEFAULT_CONTROLS, DU_ZERO, IntegratorControls, StopRule, integrate
from .params import ModelParams
from .profile import J_GATE, build_profile
from .shooting import CriticalResult, find_critical, shoot_to_zero, theta_zero, xi_samples

__all__ = ["CheckResult", "run_all", "CHECKS"]

BASE_REL_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{status} {self.name}: {self.detail}"
        if not self.passed and self.counterexample:
            out += " | first counterexample: " + ", ".join(f"{k}={v!r}" for k, v in self.counterexample.items())
        return out


def _loosen(controls: IntegratorControls) -> float:
    return max(1.0, controls.rel_tol / BASE_REL_TOL)


def check_stationary(params, controls, crit):
    ctl = controls.replace(r_max=100.0)
    traj = integrate(1.0, params, ctl, StopRule.until_rmax())
    dev = np.abs(traj.y[:, 0] - 1.0)
    j = int(np.argmax(dev))
    ok = dev[j] < 1e-12 and not traj.events_of("U_ZERO_DOWN", "DU_ZERO")
    return CheckResult("stationary", ok, f"sup|u-1| on r<=100 is {dev[j]:.3e}",
                       {} if ok else {"a": 1.0, "r": float(traj.r[j]), "u": float(traj.y[j, 0])})


def check_energy(params, controls, crit, n=20, seed=0):
    rng = np.random.default_rng(seed)
    heights = np.sort(rng.uniform(0.1, 50.0, n))
    ctl = controls.replace(r_max=20.0)
    floor = -params.p / (params.p + 1.0)
    worst = 0.0
    for a in heights:
        traj = integrate(float(a), params, ctl, StopRule.until_rmax())
        u, du = traj.y[:, 0], traj.y[:, 1]
        E = 0.5 * du**2 + np.abs(u) ** (params.p + 1) / (params.p + 1) - u
        e0 = a ** (params.p + 1) / (params.p + 1) - a
        tol_e = 10.0 * controls.rel_tol * (1.0 + abs(e0))
        rise = np.diff(E)
        j = int(np.argmax(rise))
        if rise[j] > tol_e:
            return CheckResult("energy", False, "energy increased",
                               {"a": float(a), "r": float(traj.r[j + 1]), "dE": float(rise[j])})
        k = int(np.argmin(E))
        if E[k] < floor - tol_e:
            return CheckResult("energy", False, "energy below floor",
                               {"a": float(a), "r": float(traj.r[k]), "E": float(E[k])})
        worst = max(worst, rise[j] / tol_e)
    return CheckResult("energy", True, f"{n} heights, max increase {worst:.2e} x tol_E")


def check_oscillation(params, controls, crit, heights=(0.2, 3.0), count=6):
    for a in heights:
        traj = integrate(a, params, controls, StopRule.n_zeros(count, "du"))
        ext = [e.state.u for e in traj.events_of(DU_ZERO)][:count]
        if len(ext) < count:
            return CheckResult("oscillation", False, "too few extrema", {"a": a, "found": len(ext)})
        vals = [a] + ext if a > 1 else ext
        sides = np.sign(np.array(vals) - 1.0)
        dist = np.abs(np.array(vals) - 1.0)
        for i in range(len(vals) - 1):
            if sides[i] == sides[i + 1] or not dist[i + 1] < dist[i]:
                return CheckResult("oscillation", False, "extrema do not alternate with shrinking amplitude",
                                   {"a": a, "i": i, "u_i": vals[i], "u_next": vals[i + 1]})
    return CheckResult("oscillation", True, f"heights {heights}, {count} extrema each")


def _heights(crit, factors=(1.2, 2.0, 10.0)):
    return [f * crit.a_c for f in factors]


def check_monotone_before_zero(params, controls, crit):
    for a in _heights(crit):
        traj = shoot_to_zero(a, params, controls, dense=True)
        R = traj.events[-1].r
        r = np.linspace(10 * traj.r0, R, 400, endpoint=False)[1:]
        du = traj(r)[1]
        if np.any(du >= 0):
            j = int(np.argmax(du >= 0))
            return CheckResult("monotone-before-zero", False, "u' >= 0 before R(a)",
                               {"a": a, "r": float(r[j]), "du": float(du[j])})
    return CheckResult("monotone-before-zero", True, "u' < 0 on (0, R(a)) at a = 1.2, 2, 10 x a_c")


def check_sensitivity_sign(params, controls, crit):
    for a in _heights(crit):
        try:
            tz = theta_zero(a, params, controls)
        except Exception as exc:  # MultipleThetaZeros or NotCrossing
            return CheckResult("sensitivity-sign", False, str(exc), {"a": a})
        if not (tz.u_at_z > 1.0 and tz.theta_at_R < 0 and 0 < tz.z < tz.R):
            return CheckResult("sensitivity-sign", False, "sign structure violated",
                               {"a": a, "z": tz.z, "u_z": tz.u_at_z, "theta_R": tz.theta_at_R})
        r, xi = xi_samples(a, params, 100, controls)
        if np.any(xi <= 0):
            j = int(np.argmax(xi <= 0))
            return CheckResult("sensitivity-sign", False, "xi not positive", {"a": a, "r": float(r[j])})
    return CheckResult("sensitivity-sign", True, "one theta zero, u(z)>1, theta(R)<0, xi>0")


def check_scaling(params, controls, crit, heights=(3.0, 50.0)):
    lane = lane_emden(params, controls)
    tol = 1e3 * controls.rel_tol
    worst = 0.0
    for a in heights:
        shrink = a ** (-(params.p - 1.0) / 2.0)
        stop = StopRule.until_rmax()
        u = integrate(a, params, controls.replace(r_max=1.01 * lane.z1 * shrink), stop, dense=True)
        v = integrate(1.0, params, controls.replace(r_max=1.01 * lane.z1), stop,
                      forcing=a ** (-params.p), dense=True)
        rv = np.linspace(max(v.r[0], u.r[0] / shrink), lane.z1, 300)
        diff = np.abs(v(rv)[0] - u(rv * shrink)[0] / a)
        j = int(np.argmax(diff))
        worst = max(worst, diff[j])
        if diff[j] > tol:
            return CheckResult("scaling", False, "v and rescaled u disagree",
                               {"a": a, "r": float(rv[j]), "diff": float(diff[j])})
    return CheckResult("scaling", True, f"sup|v - u_rescaled| = {worst:.2e} <= {tol:.1e}")


def check_divergence_identity(params, controls, crit, n=12):
    tol = 1e3 * controls.rel_tol
    grid = np.geomspace(crit.a_hi * (1 + 1e-3), 1e4 * crit.a_c, n)
    worst = 0.0
    for a in grid:
        pt = mass_point(float(a), params, controls)
        worst = max(worst, pt.identity_residual)
        if pt.identity_residual > tol:
            return CheckResult("divergence-identity", False, "mass quadrature vs boundary term",
                               {"a": float(a), "residual": pt.identity_residual})
    return CheckResult("divergence-identity", True, f"max residual {worst:.2e} <= {tol:.1e}")


def check_lane_emden(params, controls, crit):
    lane = lane_emden(params, controls)
    tol = 1e3 * controls.rel_tol
    ok = lane.identity_residual <= tol and lane.slope_at_z1 < 0
    return CheckResult("lane-emden-identity", ok,
                       f"z1={lane.z1:.10g}, residual {lane.identity_residual:.2e} <= {tol:.1e}",
                       {} if ok else {"z1": lane.z1, "residual": lane.identity_residual})


def check_J_gate(params, controls, crit):
    factor = _loosen(controls)
    for a in (crit.a_hi, 2.0 * crit.a_c):
        table = build_profile(a, params, controls, require_compact=True)
        gate = J_GATE * factor * (1.0 + abs(table.mu))
        if not table.max_J_dev <= gate:
            return CheckResult("J-gate", False, "J not constant on the support",
                               {"a": a, "maxJdev": table.max_J_dev, "gate": gate})
    return CheckResult("J-gate", True, "J constant on the support at a = a_c, 2 a_c")


def check_order(params, controls, crit, a=3.0, r_end=2.0, steps=(0.2, 0.1, 0.05)):
    """Observed convergence order of the pair with error control switched off,
    plus error reduction of the adaptive mode over two decades of tolerance.

    The order comes from self-convergence (differences of successive
    halvings), measured at the coarsest resolution: finer halvings reach the
    error floor set by the first step off the singular origin.
    """
    stop = StopRule.until_rmax()
    u = [integrate(a, params, controls.replace(fixed_step=h, r_max=r_end), stop).final.u for h in steps]
    diffs = [abs(u[i] - u[i + 1]) for i in range(len(u) - 1)]
    order = math.log2(diffs[0] / diffs[1])
    if order < 5.0:
        return CheckResult("order", False, "fixed-step convergence order below 5",
                           {"h": steps, "differences": diffs, "order": order})
    ref = integrate(a, params, controls.replace(rel_tol=1e-13, abs_tol=1e-15, r_max=r_end), stop).final.u
    tol = max(controls.rel_tol, 1e-9)
    e_coarse = abs(integrate(a, params, controls.replace(rel_tol=tol * 100, abs_tol=tol, r_max=r_end), stop).final.u - ref)
    e_fine = abs(integrate(a, params, controls.replace(rel_tol=tol, abs_tol=tol * 1e-2, r_max=r_end), stop).final.u - ref)
    if not e_fine < e_coarse:
        return CheckResult("order", False, "tightening the tolerance did not reduce the error",
                           {"coarse": e_coarse, "fine": e_fine})
    return CheckResult("order", True, f"observed order {order:.1f}; error {e_coarse:.1e} -> {e_fine:.1e} over two decades of tol")


CHECKS = [
    check_stationary,
    check_energy,
    check_oscillation,
    check_monotone_before_zero,
    check_sensitivity_sign,
    check_scaling,
    check_divergence_identity,
    check_lane_emden,
    check_J_gate,
    check_order,
]


def run_all(params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS,
            crit: CriticalResult | None = None, bisect_tol: float = 1e-8) -> list[CheckResult]:
    crit = crit or find_critical(params, tol=bisect_tol, controls=controls)
    results = []
    for check in CHECKS:
        try:
            results.append(check(params, controls, crit))
        except Exception as exc:
            name = check.__name__.removeprefix("check_").replace("_", "-")
            results.append(CheckResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return results
