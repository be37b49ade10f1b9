"""Augmented shooting system and its adaptive integrator.

The state carried along the radius is ``(u, u', theta, theta', mass)`` where
``theta = du/da`` is the sensitivity to the shooting height and ``mass`` is
the running integral of ``max(u, 0)**p r**(d-1)``. The equation is

    u'' + (d-1)/r u' + |u|**(p-1) u - f = 0,      u(0) = a, u'(0) = 0,

with forcing ``f = 1`` for the profile problem, ``f = 0`` for the
Lane-Emden limit and ``f = a**-p`` for the rescaled equation of ``v``.

Stepping is delegated to scipy's DOP853 (an 8(5,3) embedded pair with a
7th-order continuous extension). Event detection and polishing are done
here on the per-step dense output.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .errors import BudgetExceeded, StepUnderflow
from .params import ModelParams

__all__ = [
    "IntegratorControls",
    "DEFAULT_CONTROLS",
    "ShootState",
    "Event",
    "StopRule",
    "Trajectory",
    "rhs",
    "series_start",
    "effective_r0",
    "integrate",
    "energy",
    "U_ZERO_DOWN",
    "U_ZERO_UP",
    "DU_ZERO",
    "THETA_ZERO",
]

U_ZERO_DOWN = "U_ZERO_DOWN"
U_ZERO_UP = "U_ZERO_UP"
DU_ZERO = "DU_ZERO"
THETA_ZERO = "THETA_ZERO"

# state vector layout
IU, IDU, ITH, IDTH, IMASS = range(5)


@dataclass(frozen=True)
class IntegratorControls:
    """Tolerances and budgets for one integration.

    ``fixed_step`` disables error control and runs the pair with a constant
    step; it exists to measure the convergence order of the scheme.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r0: float = 1e-4
    r_max: float = 1e3
    max_steps: int = 1_000_000
    event_tol: float = 1e-12
    fixed_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.event_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.r0 < self.r_max:
            raise ValueError("need 0 < r0 < r_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise ValueError("fixed_step must be positive")

    def replace(self, **changes) -> "IntegratorControls":
        from dataclasses import replace

        return replace(self, **changes)


DEFAULT_CONTROLS = IntegratorControls()


class ShootState(NamedTuple):
    r: float
    u: float
    du: float
    theta: float
    dtheta: float
    mass: float

    @property
    def y(self) -> np.ndarray:
        return np.array(self[1:], dtype=float)

    @classmethod
    def from_vector(cls, r: float, y) -> "ShootState":
        return cls(float(r), *(float(v) for v in y))


@dataclass(frozen=True)
class Event:
    kind: str
    r: float
    state: ShootState


@dataclass(frozen=True)
class StopRule:
    """When to stop integrating.

    Use the constructors ``first_u_zero()``, ``first_classifying_event()``,
    ``until_rmax()`` and ``n_zeros(k, component)``.
    """

    kind: str
    count: int = 0
    component: str = "u"

    @classmethod
    def first_u_zero(cls):
        return cls("FIRST_U_ZERO")

    @classmethod
    def first_classifying_event(cls):
        return cls("FIRST_CLASSIFYING_EVENT")

    @classmethod
    def until_rmax(cls):
        return cls("UNTIL_RMAX")

    @classmethod
    def n_zeros(cls, k: int, component: str = "u"):
        if component not in ("u", "du", "theta"):
            raise ValueError(f"unknown component {component!r}")
        if k < 1:
            raise ValueError("k must be >= 1")
        return cls("N_ZEROS", k, component)

    def fires(self, events: list[Event]) -> bool:
        last = events[-1]
        if self.kind == "FIRST_U_ZERO":
            return last.kind == U_ZERO_DOWN
        if self.kind == "FIRST_CLASSIFYING_EVENT":
            return last.kind in (U_ZERO_DOWN, DU_ZERO)
        if self.kind == "N_ZEROS":
            kinds = {"u": (U_ZERO_DOWN, U_ZERO_UP), "du": (DU_ZERO,), "theta": (THETA_ZERO,)}
            wanted = kinds[self.component]
            return last.kind in wanted and sum(e.kind in wanted for e in events) >= self.count
        return False


@dataclass
class Trajectory:
    """Accepted steps, optional dense output and located events.

    ``r`` and ``y`` hold the step endpoints (``y[j]`` is the state vector at
    ``r[j]``). ``r[0]`` is the series-start radius, not zero. When built with
    ``dense=True`` the trajectory can be evaluated anywhere in
    ``[r[0], r[-1]]`` by calling it.
    """

    a: float
    params: ModelParams
    forcing: float
    r: np.ndarray
    y: np.ndarray
    events: list[Event]
    stopped_by: str
    r0: float
    dense: list = field(default_factory=list, repr=False)

    @property
    def final(self) -> ShootState:
        return ShootState.from_vector(self.r[-1], self.y[-1])

    def events_of(self, *kinds: str) -> list[Event]:
        return [e for e in self.events if e.kind in kinds]

    def first(self, kind: str) -> Event | None:
        for e in self.events:
            if e.kind == kind:
                return e
        return None

    def __call__(self, r):
        """Dense evaluation; returns an array of shape (5,) or (5, n)."""
        if not self.dense:
            raise RuntimeError("trajectory was integrated without dense output")
        scalar = np.ndim(r) == 0
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((5, rs.size))
        for i, ri in enumerate(rs):
            if ri < self.r[0] or ri > self.r[-1]:
                raise ValueError(f"r={ri} outside [{self.r[0]}, {self.r[-1]}]")
            j = min(max(bisect.bisect_left(self.r, ri) - 1, 0), len(self.dense) - 1)
            out[:, i] = self.dense[j](ri)
        return out[:, 0] if scalar else out


def _signed_pow(u: float, p: float) -> float:
    return math.copysign(abs(u) ** p, u)


def rhs(r: float, y, params: ModelParams, forcing: float = 1.0) -> np.ndarray:
    """Right-hand side of the augmented first-order system (``r > 0``)."""
    u, du, th, dth, _ = y
    d, p = params.d, params.p
    k = (d - 1) / r
    au = abs(u)
    upm1 = au ** (p - 1.0) if au > 0 else 0.0
    return np.array(
        [
            du,
            -k * du - upm1 * u + forcing,
            dth,
            -k * dth - p * upm1 * th,
            (u**p if u > 0 else 0.0) * r ** (d - 1),
        ]
    )


def effective_r0(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS,
                 forcing: float = 1.0) -> float:
    """Series-start radius, shrunk for large |1 - a**p|."""
    scale = abs(forcing - _signed_pow(a, params.p))
    return controls.r0 / math.sqrt(max(1.0, scale))


def series_start(a: float, params: ModelParams, r0: float, forcing: float = 1.0) -> ShootState:
    """Taylor expansion of the regular solution at ``r = r0``."""
    d, p = params.d, params.p
    ap = _signed_pow(a, p)
    apm1 = abs(a) ** (p - 1.0) if a != 0 else 0.0
    c2 = (forcing - ap) / (2.0 * d)
    c4 = -p * apm1 * c2 / (4.0 * (d + 2))
    t2 = -p * apm1 / (2.0 * d)
    if a != 0:
        t4 = -p * ((p - 1.0) * abs(a) ** (p - 2.0) * c2 + apm1 * t2) / (4.0 * (d + 2))
    else:
        t4 = 0.0
    r2 = r0 * r0
    u = a + c2 * r2 + c4 * r2 * r2
    du = 2.0 * c2 * r0 + 4.0 * c4 * r0 * r2
    theta = 1.0 + t2 * r2 + t4 * r2 * r2
    dtheta = 2.0 * t2 * r0 + 4.0 * t4 * r0 * r2
    if a > 0:
        mass = a**p * r0**d / d + p * a ** (p - 1.0) * c2 * r0 ** (d + 2) / (d + 2)
    else:
        mass = 0.0
    return ShootState(r0, u, du, theta, dtheta, mass)


def energy(state, params: ModelParams, forcing: float = 1.0) -> float:
    """``|u'|**2/2 + |u|**(p+1)/(p+1) - f u``; non-increasing in r.

    ``state`` may be a :class:`ShootState` or any object with ``u``/``du``.
    """
    p = params.p
    u, du = state.u, state.du
    return 0.5 * du * du + abs(u) ** (p + 1.0) / (p + 1.0) - forcing * u


def _changes_sign(before: float, after: float) -> bool:
    return before != 0.0 and (after == 0.0 or (before > 0) != (after > 0))


def _crossing_kind(comp: str, before: float, after: float) -> str:
    if comp == "u":
        return U_ZERO_DOWN if before > 0 else U_ZERO_UP
    return DU_ZERO if comp == "du" else THETA_ZERO


def _locate(dense, index: int, r_lo: float, r_hi: float, event_tol: float) -> float:
    g = lambda s: dense(s)[index]  # noqa: E731
    g_lo, g_hi = g(r_lo), g(r_hi)
    if g_hi == 0.0:
        return r_hi
    if g_lo == 0.0:
        return r_lo
    if g_lo * g_hi > 0:
        # dense output disagrees in sign with the step endpoints; keep the endpoint
        return r_hi
    return brentq(g, r_lo, r_hi, xtol=max(event_tol * 1e-3, 4 * np.finfo(float).eps * r_hi),
                  rtol=4 * np.finfo(float).eps, maxiter=200)


def integrate(
    a: float,
    params: ModelParams,
    controls: IntegratorControls = DEFAULT_CONTROLS,
    stop: StopRule | None = None,
    *,
    forcing: float = 1.0,
    dense: bool = False,
) -> Trajectory:
    """Integrate the shooting problem from the series start.

    Parameters
    ----------
    a : float
        Shooting height ``u(0)``.
    stop : StopRule
        Defaults to ``StopRule.first_u_zero()``.
    forcing : float
        Constant source term ``f``; 1 for the profile equation.
    dense : bool
        Keep the per-step continuous extension so the result is callable.

    Returns
    -------
    Trajectory
        ``stopped_by`` is ``"event"`` or ``"r_max"``.

    Raises
    ------
    BudgetExceeded
        ``controls.max_steps`` accepted steps without the stop rule firing.
    StepUnderflow
        The step size became too small to represent.
    """
    stop = stop or StopRule.first_u_zero()
    r0 = effective_r0(a, params, controls, forcing)
    start = series_start(a, params, r0, forcing)
    fun = lambda r, y: rhs(r, y, params, forcing)  # noqa: E731
    if controls.fixed_step is None:
        solver = DOP853(fun, r0, start.y, controls.r_max, rtol=controls.rel_tol, atol=controls.abs_tol)
    else:
        # error control switched off: every step is accepted at the capped size
        h = controls.fixed_step
        solver = DOP853(fun, r0, start.y, controls.r_max, rtol=1e10, atol=1e10, first_step=h, max_step=h)

    rs = [r0]
    ys = [start.y]
    events: list[Event] = []
    dense_steps = []
    du_ignore = 10.0 * r0
    stopped_by = "r_max"
    steps = 0

    while solver.status == "running":
        if steps >= controls.max_steps:
            raise BudgetExceeded(f"a={a!r}: {steps} steps without reaching the stop rule")
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepUnderflow(f"a={a!r} at r={solver.t!r}: {message}")
        r_lo, r_hi = solver.t_old, solver.t
        y_lo, y_hi = ys[-1], solver.y.copy()
        sol = None
        if dense:
            sol = solver.dense_output()
            dense_steps.append(sol)

        found = []
        # u' first: u is monotone between its extrema, so a located extremum
        # splits the step and exposes double crossings of u inside one step
        u_nodes = [(r_lo, y_lo[IU])]
        for index, comp in ((IDU, "du"), (ITH, "theta")):
            before, after = y_lo[index], y_hi[index]
            if not _changes_sign(before, after):
                continue
            if comp == "du" and r_hi <= du_ignore:
                continue
            if sol is None:
                sol = solver.dense_output()
            r_ev = _locate(sol, index, r_lo, r_hi, controls.event_tol)
            if comp == "du" and r_ev <= du_ignore:
                continue
            state = ShootState.from_vector(r_ev, sol(r_ev))
            found.append(Event(_crossing_kind(comp, before, after), r_ev, state))
            if comp == "du" and r_lo < r_ev < r_hi:
                u_nodes.append((r_ev, state.u))
        u_nodes.append((r_hi, y_hi[IU]))
        for (ra, ua), (rb, ub) in zip(u_nodes[:-1], u_nodes[1:]):
            if not _changes_sign(ua, ub):
                continue
            if sol is None:
                sol = solver.dense_output()
            r_ev = _locate(sol, IU, ra, rb, controls.event_tol)
            state = ShootState.from_vector(r_ev, sol(r_ev))
            found.append(Event(_crossing_kind("u", ua, ub), r_ev, state))
        found.sort(key=lambda e: e.r)

        fired = None
        for ev in found:
            events.append(ev)
            if stop.fires(events):
                fired = ev
                break

        if fired is not None:
            if fired.r < r_hi:
                rs.append(fired.r)
                ys.append(fired.state.y)
            else:
                rs.append(r_hi)
                ys.append(y_hi)
            stopped_by = "event"
            break
        rs.append(r_hi)
        ys.append(y_hi)

    return Trajectory(
        a=a,
        params=params,
        forcing=forcing,
        r=np.asarray(rs),
        y=np.asarray(ys),
        events=events,
        stopped_by=stopped_by,
        r0=r0,
        dense=dense_steps,
    )
