"""Large-height limit: the Lane-Emden problem and its mass.

As ``a -> inf`` the rescaled profile ``v(r) = u(r a**(-(p-1)/2), a) / a``
solves the shooting equation with forcing ``a**-p`` and converges to the
solution ``w`` of the unforced (Lane-Emden) equation with ``w(0) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ode import DEFAULT_CONTROLS, IntegratorControls, StopRule, Trajectory, integrate
from .params import ModelParams

__all__ = [
    "LaneEmdenResult",
    "lane_emden",
    "lane_emden_trajectory",
    "v_trajectory",
    "rescaled_u",
    "sup_distance_to_lane_emden",
    "mcal_limit_check",
]


@dataclass(frozen=True)
class LaneEmdenResult:
    """First zero of ``w`` and the limiting mass.

    ``integral_wp`` is the quadrature of ``w**p r**(d-1)`` on ``(0, z1)``
    carried by the integrator; ``boundary_term`` is ``z1**(d-1) |w'(z1)|``,
    which equals it exactly for the true solution. The limit mass is built
    from the boundary term: at a given tolerance it is about two orders of
    magnitude more accurate than the carried quadrature, and the two are
    compared through ``identity_residual``.
    """

    d: int
    z1: float
    slope_at_z1: float
    integral_wp: float
    mcal_limit: float

    @property
    def boundary_term(self) -> float:
        return self.z1 ** (self.d - 1) * abs(self.slope_at_z1)

    @property
    def identity_residual(self) -> float:
        return abs(self.integral_wp - self.boundary_term) / self.boundary_term


def lane_emden_trajectory(params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS,
                          dense: bool = False) -> Trajectory:
    return integrate(1.0, params, controls, StopRule.first_u_zero(), forcing=0.0, dense=dense)


def lane_emden(params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS) -> LaneEmdenResult:
    """Solve ``w'' + (d-1)/r w' + |w|**(p-1) w = 0``, ``w(0)=1``, to its first zero."""
    traj = lane_emden_trajectory(params, controls)
    if traj.stopped_by != "event":
        raise RuntimeError("Lane-Emden solution did not reach zero before r_max")
    end = traj.final
    boundary = end.r ** (params.d - 1) * abs(end.du)
    return LaneEmdenResult(
        d=params.d,
        z1=end.r,
        slope_at_z1=end.du,
        integral_wp=end.mass,
        mcal_limit=params.d * params.ball_volume * boundary,
    )


def v_trajectory(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS,
                 stop: StopRule | None = None, dense: bool = True) -> Trajectory:
    """Integrate the rescaled equation for ``v(., a)`` directly (v(0) = 1)."""
    return integrate(1.0, params, controls, stop or StopRule.first_u_zero(),
                     forcing=a ** (-params.p), dense=dense)


def rescaled_u(traj_u: Trajectory, r, params: ModelParams) -> np.ndarray:
    """``u(r a**(-(p-1)/2), a) / a`` from a dense u-trajectory.

    Radii below the series start are filled by the start value (the
    solution is flat there to O(r0**2)).
    """
    a = traj_u.a
    s = np.asarray(r, dtype=float) * a ** (-(params.p - 1.0) / 2.0)
    s = np.clip(s, traj_u.r[0], traj_u.r[-1])
    return traj_u(s)[0] / a


def sup_distance_to_lane_emden(a: float, radius: float, params: ModelParams,
                               controls: IntegratorControls = DEFAULT_CONTROLS, n: int = 400) -> float:
    """``sup |v(r, a) - w(r)|`` over ``r`` in ``[0, radius]`` (sampled)."""
    stop = StopRule.until_rmax()
    ctl = controls.replace(r_max=radius * 1.001 + controls.r0)
    v = integrate(1.0, params, ctl, stop, forcing=a ** (-params.p), dense=True)
    w = integrate(1.0, params, ctl, stop, forcing=0.0, dense=True)
    r = np.linspace(max(v.r[0], w.r[0]), radius, n)
    return float(np.max(np.abs(v(r)[0] - w(r)[0])))


def mcal_limit_check(a_list, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS,
                     lane: LaneEmdenResult | None = None):
    """Rows ``(a, M(a), |M(a) - M_c|)`` for each height in ``a_list``."""
    from .mass import mass_of

    lane = lane or lane_emden(params, controls)
    rows = []
    for a in a_list:
        mcal, _ = mass_of(a, params, controls)
        rows.append((float(a), mcal, abs(mcal - lane.mcal_limit)))
    return rows
