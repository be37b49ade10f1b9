"""Mass functional of the compactly supported profiles.

For ``a > a_c``::

    M(a) = d |B(0,1)| int_0^R(a) u(r, a)**p r**(d-1) dr

The integral is carried as an extra component of the ODE state. Integrating
the equation in divergence form gives the independent check
``M(a) = |B| R**d - d |B| R**(d-1) u'(R)``.

The physical mass of the self-similar solution built from ``u(., a)`` is
``params.mass_factor * M(a)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .asymptotics import LaneEmdenResult
from .errors import InconsistentDimension, ProfileError
from .ode import DEFAULT_CONTROLS, IntegratorControls
from .params import ModelParams, make_params
from .shooting import shoot_to_zero

__all__ = [
    "MassCurvePoint",
    "MassCurve",
    "ScanError",
    "mass_of",
    "mass_point",
    "default_grid",
    "scan",
    "thresholds",
]


class ScanError(ProfileError):
    """A grid point failed; ``a`` is the offending height."""

    def __init__(self, a, cause):
        super().__init__(f"scan failed at a={a!r}: {cause}")
        self.a = a
        self.cause = cause


@dataclass(frozen=True)
class MassCurvePoint:
    a: float
    R: float
    scaled_R: float
    mcal: float
    mphys: float
    identity_residual: float
    slope_at_R: float


@dataclass
class MassCurve:
    d: int
    points: list[MassCurvePoint]
    mcal2: float
    a_at_max: float
    mcal_limit: float | None = None
    refined: bool = False
    refinement: list[MassCurvePoint] = field(default_factory=list)

    @property
    def a(self) -> np.ndarray:
        return np.array([pt.a for pt in self.points])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points])

    def decreasing(self, name: str, resolution: float = 0.0) -> bool:
        """True if ``name`` never increases by more than ``resolution``
        (relative) between consecutive grid points; ``0`` asks for strict decrease."""
        x = self.column(name)
        return bool(np.all(np.diff(x) < resolution * np.abs(x[1:])))

    def resolved_until(self, name: str) -> float:
        """Largest grid height up to which ``name`` is strictly decreasing."""
        x = self.column(name)
        bad = np.flatnonzero(np.diff(x) >= 0)
        return float(self.a[-1] if bad.size == 0 else self.a[bad[0]])

    @property
    def mass_decreasing(self) -> bool:
        return self.decreasing("mcal")

    @property
    def R_decreasing(self) -> bool:
        return self.decreasing("R")

    @property
    def scaled_R_decreasing(self) -> bool:
        return self.decreasing("scaled_R")


def mass_point(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS) -> MassCurvePoint:
    end = shoot_to_zero(a, params, controls).final
    d, ball = params.d, params.ball_volume
    R, du = end.r, end.du
    mcal = d * ball * end.mass
    boundary = ball * R**d - d * ball * R ** (d - 1) * du
    return MassCurvePoint(
        a=float(a),
        R=R,
        scaled_R=a ** ((params.p - 1.0) / 2.0) * R,
        mcal=mcal,
        mphys=params.mass_factor * mcal,
        identity_residual=abs(mcal - boundary) / mcal,
        slope_at_R=du,
    )


def mass_of(a: float, params: ModelParams, controls: IntegratorControls = DEFAULT_CONTROLS):
    """Return ``(M(a), relative residual of the divergence identity)``."""
    pt = mass_point(a, params, controls)
    return pt.mcal, pt.identity_residual


def default_grid(a_c: float, n: int = 200, lo_offset: float = 1e-3, hi_factor: float = 1e4) -> np.ndarray:
    """Log-spaced heights on ``[a_c (1 + lo_offset), hi_factor a_c]``."""
    return np.geomspace(a_c * (1.0 + lo_offset), hi_factor * a_c, n)


def _point_task(args):
    a, d, controls = args
    try:
        return mass_point(a, make_params(d), controls)
    except ProfileError as exc:
        return ScanError(a, exc)


def _refine(points, params, controls, a_c):
    """Push the maximum beyond the grid resolution.

    Interior argmax: golden-section search on the neighbouring interval.
    Argmax at the first grid point: probe geometrically closer to a_c.
    """
    masses = [pt.mcal for pt in points]
    i = int(np.argmax(masses))
    extra = []
    if 0 < i < len(points) - 1:
        f = lambda a: -mass_point(a, params, controls).mcal  # noqa: E731
        res = minimize_scalar(f, bracket=(points[i - 1].a, points[i].a, points[i + 1].a),
                              method="golden", tol=1e-6)
        extra.append(mass_point(float(res.x), params, controls))
    elif i == 0 and a_c is not None and points[0].a > a_c:
        gap = points[0].a - a_c
        for k in range(1, 4):
            a = a_c + gap * 10.0**-k
            try:
                extra.append(mass_point(a, params, controls))
            except ProfileError:
                break
    return extra


def scan(
    params: ModelParams,
    a_grid,
    controls: IntegratorControls = DEFAULT_CONTROLS,
    lane: LaneEmdenResult | None = None,
    a_c: float | None = None,
    refine: bool = True,
    jobs: int = 1,
) -> MassCurve:
    """Evaluate the mass curve on an increasing grid of heights.

    Points are independent; with ``jobs > 1`` they are computed in worker
    processes and reassembled in grid order, so the result does not depend
    on the level of parallelism.

    Raises
    ------
    ScanError
        First grid point (in grid order) whose shot failed.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.ndim != 1 or a_grid.size == 0 or np.any(np.diff(a_grid) <= 0):
        raise ValueError("a_grid must be a non-empty strictly increasing 1-D array")
    if lane is not None and lane.d != params.d:
        raise InconsistentDimension(f"Lane-Emden data for d={lane.d}, scan at d={params.d}")
    tasks = [(float(a), params.d, controls) for a in a_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_point_task(t) for t in tasks]
    for res in results:
        if isinstance(res, ScanError):
            raise res
    points = results
    extra = _refine(points, params, controls, a_c) if refine else []
    best = max(points + extra, key=lambda pt: pt.mcal)
    return MassCurve(
        d=params.d,
        points=points,
        mcal2=best.mcal,
        a_at_max=best.a,
        mcal_limit=lane.mcal_limit if lane is not None else None,
        refined=bool(extra),
        refinement=extra,
    )


def thresholds(curve: MassCurve, lane: LaneEmdenResult, params: ModelParams | None = None):
    """Physical thresholds ``(M_c, M_2)`` from the limit mass and the curve's sup.

    Raises
    ------
    InconsistentDimension
        ``curve`` and ``lane`` (or ``params``) disagree on d.
    """
    if curve.d != lane.d or (params is not None and params.d != curve.d):
        raise InconsistentDimension(f"curve d={curve.d}, Lane-Emden d={lane.d}")
    params = params or make_params(curve.d)
    m_c = params.mass_factor * lane.mcal_limit
    m_2 = params.mass_factor * curve.mcal2
    if not (math.isfinite(m_2) and m_2 > m_c):
        raise ProfileError(f"expected M_2 > M_c, got M_2={m_2!r}, M_c={m_c!r}")
    return m_c, m_2
