"""Shot classification, the critical height and the first-zero map R(a).

For ``a > 0`` the solution of the shooting problem either stays positive
(then its first interior minimum lies in (0, 1)) or reaches zero with a
negative slope at ``R(a)``. The two sets are the intervals ``(0, a_c)`` and
``(a_c, inf)``, which makes the critical height a bisection target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousNearCritical,
    BudgetExceeded,
    InvalidBracket,
    MultipleThetaZeros,
    NotCrossing,
)
from .ode import (
    DEFAULT_CONTROLS,
    DU_ZERO,
    THETA_ZERO,
    U_ZERO_DOWN,
    U_ZERO_UP,
    IntegratorControls,
    StopRule,
    Trajectory,
    integrate,
)
from .params import ModelParams

__all__ = [
    "POSITIVE_FOREVER",
    "CROSSES_ZERO",
    "Classification",
    "CriticalResult",
    "ThetaZero",
    "Component",
    "classify",
    "find_critical",
    "shoot_to_zero",
    "first_zero",
    "theta_zero",
    "xi_samples",
    "dR_da",
    "positivity_components",
    "scaled_radius",
]

POSITIVE_FOREVER = "PositiveForever"
CROSSES_ZERO = "CrossesZero"


@dataclass(frozen=True)
class Classification:
    """Outcome of one shot.

    For ``PositiveForever`` the witness is the first interior extremum
    ``(r1, u(r1))``; for ``CrossesZero`` it is ``(R(a), u'(R(a)))``.
    """

    a: float
    kind: str
    witness_r: float
    witness_value: float

    @property
    def crosses(self) -> bool:
        return self.kind == CROSSES_ZERO


@dataclass(frozen=True)
class CriticalResult:
    a_lo: float
    a_hi: float
    R_touch: float
    iterations: int
    stopped_ambiguous: bool = False

    @property
    def a_c(self) -> float:
        return 0.5 * (self.a_lo + self.a_hi)

    @property
    def width(self) -> float:
        return self.a_hi - self.a_lo


@dataclass(frozen=True)
class ThetaZero:
    """The sensitivity zero z(a) and companion values on [0, R(a)]."""

    a: float
    z: float
    R: float
    theta_at_R: float
    u_at_z: float


@dataclass(frozen=True)
class Component:
    """Maximal interval where u > 0; ``closed`` if u returns to zero."""

    start: float
    end: float
    closed: bool


def classify(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS) -> Classification:
    """Classify a shot as ``PositiveForever`` or ``CrossesZero``.

    Integration stops at the first zero of u or the first interior
    critical point of u, whichever comes first. A critical point with
    ``u > 0`` before any zero certifies positivity: along crossing
    trajectories u is strictly decreasing up to R(a).

    Raises
    ------
    AmbiguousNearCritical
        The first minimum is positive but below ``10 * event_tol``.
    BudgetExceeded
        No classifying event before ``r_max``.
    """
    if a <= 0:
        raise ValueError(f"classify needs a > 0, got {a!r}")
    if a == 1.0:
        return Classification(a, POSITIVE_FOREVER, 0.0, 1.0)
    traj = integrate(a, params, controls, StopRule.first_classifying_event())
    if traj.stopped_by != "event":
        raise BudgetExceeded(f"a={a!r}: no classifying event before r_max={controls.r_max}")
    ev = traj.events[-1]
    if ev.kind == U_ZERO_DOWN:
        return Classification(a, CROSSES_ZERO, ev.r, ev.state.du)
    # DU_ZERO with u > 0
    if a > 1.0 and ev.state.u < 10.0 * controls.event_tol:
        raise AmbiguousNearCritical(a, ev.r, ev.state.u)
    return Classification(a, POSITIVE_FOREVER, ev.r, ev.state.u)


def _default_bracket(params, controls):
    lo = params.critical_energy_height
    hi = 10.0 * lo
    for _ in range(60):
        if classify(hi, params, controls).crosses:
            return lo, hi
        lo, hi = hi, 2.0 * hi
    raise InvalidBracket("could not find a crossing height by geometric expansion")


def find_critical(
    params: ModelParams,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-8,
    controls: IntegratorControls = DEFAULT_CONTROLS,
) -> CriticalResult:
    """Bisect the classification predicate for the critical height a_c.

    If a probe becomes too close to the touching trajectory to classify,
    bisection stops early with the current (valid) bracket.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if bracket is None:
        lo, hi = _default_bracket(params, controls)
    else:
        lo, hi = map(float, bracket)
        if not 0 < lo < hi:
            raise InvalidBracket(f"bad bracket {bracket!r}")
        if classify(lo, params, controls).crosses or not classify(hi, params, controls).crosses:
            raise InvalidBracket(f"endpoints of {bracket!r} do not straddle a_c")
    iterations = 0
    ambiguous = False
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        try:
            label = classify(mid, params, controls)
        except AmbiguousNearCritical:
            ambiguous = True
            break
        if label.crosses:
            hi = mid
        else:
            lo = mid
    touch = integrate(0.5 * (lo + hi), params, controls, StopRule.first_classifying_event())
    return CriticalResult(lo, hi, touch.events[-1].r, iterations, ambiguous)


def shoot_to_zero(
    a: float,
    params: ModelParams,
    controls: IntegratorControls = DEFAULT_CONTROLS,
    dense: bool = False,
) -> Trajectory:
    """Integrate up to R(a); raise :class:`NotCrossing` if u stays positive."""
    traj = integrate(a, params, controls, StopRule.first_classifying_event(), dense=dense)
    if traj.stopped_by != "event":
        raise BudgetExceeded(f"a={a!r}: no classifying event before r_max={controls.r_max}")
    if traj.events[-1].kind != U_ZERO_DOWN:
        raise NotCrossing(f"a={a!r} stays positive (below the critical height)")
    return traj


def first_zero(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS):
    """Return ``(R(a), u'(R(a)))``."""
    ev = shoot_to_zero(a, params, controls).events[-1]
    return ev.r, ev.state.du


def theta_zero(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS) -> ThetaZero:
    """Locate the unique zero of the sensitivity on (0, R(a))."""
    traj = shoot_to_zero(a, params, controls)
    zeros = traj.events_of(THETA_ZERO)
    if len(zeros) != 1:
        raise MultipleThetaZeros(f"a={a!r}: found {len(zeros)} zeros of theta before R(a)")
    end = traj.events[-1]
    return ThetaZero(a, zeros[0].r, end.r, end.state.theta, zeros[0].state.u)


def xi_samples(a: float, params: ModelParams, n: int = 100,
               controls: IntegratorControls = DEFAULT_CONTROLS):
    """Sample ``r**(d-1) (u' theta - u theta')`` at ``n`` interior radii of (0, R(a)).

    Positivity of this quantity is equivalent to theta/u decreasing.
    Returns ``(r, xi)`` arrays.
    """
    traj = shoot_to_zero(a, params, controls, dense=True)
    R = traj.events[-1].r
    r = np.linspace(traj.r[0], R, n + 2)[1:-1]
    u, du, th, dth, _ = traj(r)
    return r, r ** (params.d - 1) * (du * th - u * dth)


def dR_da(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS) -> float:
    """Derivative of the first-zero radius, ``-theta(R)/u'(R)``."""
    ev = shoot_to_zero(a, params, controls).events[-1]
    return -ev.state.theta / ev.state.du


def positivity_components(
    a: float,
    params: ModelParams,
    controls: IntegratorControls = DEFAULT_CONTROLS,
    r_limit: float = 20.0,
    max_components: int | None = None,
    include_tail: bool = False,
) -> list[Component]:
    """Positive humps of u(., a) on [0, r_limit].

    Integration continues through sign changes. By default only humps on
    which u returns to zero inside ``r_limit`` are reported; the trailing
    interval where u is still positive at ``r_limit`` is appended when
    ``include_tail`` is set. Gaps narrower than ``10 * event_tol`` are
    merged (tangential double roots).
    """
    ctl = controls.replace(r_max=r_limit)
    stop = StopRule.until_rmax() if max_components is None else StopRule.n_zeros(2 * max_components, "u")
    traj = integrate(a, params, ctl, stop)
    crossings = traj.events_of(U_ZERO_DOWN, U_ZERO_UP)

    intervals = []
    start = 0.0 if a > 0 else None
    for ev in crossings:
        if ev.kind == U_ZERO_DOWN and start is not None:
            intervals.append([start, ev.r])
            start = None
        elif ev.kind == U_ZERO_UP:
            if intervals and start is None and ev.r - intervals[-1][1] < 10.0 * controls.event_tol:
                start = intervals.pop()[0]
            else:
                start = ev.r

    comps = [Component(s, e, True) for s, e in intervals]
    if include_tail and start is not None and traj.stopped_by == "r_max":
        comps.append(Component(start, traj.r[-1], False))
    if max_components is not None:
        comps = comps[:max_components]
    return comps


def scaled_radius(a: float, R: float, params: ModelParams) -> float:
    """``a**((p-1)/2) R``, the first zero in the rescaled variable."""
    return a ** ((params.p - 1.0) / 2.0) * R
