"""Physical self-similar profiles built from a shot.

Given a shooting height ``a``, the density profile is

    phi(r) = lam**p * u(mu r, a)**p      for mu r < R(a),   0 beyond,

the potential profile ``psi`` is the radial Newtonian potential of ``phi``
and on the support the first integral

    J(r) = 2(d-1)/(d-2) phi**((d-2)/d) - psi - r**2/2

must be constant. The space-time solution is
``rho(t, x) = s**-d phi(|x|/s)``, ``c(t, x) = s**-(d-2) psi(|x|/s)`` with
``s(t) = (d (T - t))**(1/d)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import NotCrossing, TimeOutOfRange
from .ode import (
    DEFAULT_CONTROLS,
    U_ZERO_DOWN,
    IntegratorControls,
    StopRule,
    integrate,
    series_start,
)
from .params import ModelParams, make_params, u_to_phi

__all__ = [
    "GridSpec",
    "ProfileTable",
    "PsiResult",
    "SolutionSample",
    "J_GATE",
    "cumulative_quad4",
    "build_profile",
    "psi_of",
    "J_of",
    "check_J",
    "poisson_residual",
    "self_similar_scale",
    "evaluate_solution",
    "solution_mass",
    "solution_sup_norm",
]

J_GATE = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """How the radial table is laid out.

    ``per_step`` dense-output points are inserted inside every accepted
    integrator step. With ``n_uniform`` set, the support is instead sampled
    at that many equally spaced radii. ``margin`` adds ``margin_points``
    zero-density nodes past the support edge (fraction of the support
    radius). ``r_truncate`` is the physical window used when the profile
    has unbounded support.
    """

    per_step: int = 16
    n_uniform: int | None = None
    margin: float = 0.25
    margin_points: int = 8
    r_truncate: float = 10.0


@dataclass
class ProfileTable:
    a: float
    d: int
    r: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    psi: np.ndarray
    J: np.ndarray
    R_supp: float
    R_shoot: float
    mu: float
    max_J_dev: float
    mass: float
    mcal: float
    mphys: float
    u_slope_at_edge: float
    compact: bool
    psi_tail_bound: float = 0.0

    @property
    def infinite_mass(self) -> bool:
        return not self.compact

    @property
    def support(self) -> np.ndarray:
        """Mask of grid nodes inside the positivity set."""
        return self.phi > 0

    @property
    def J_gate_passed(self) -> bool:
        return self.max_J_dev <= J_GATE * (1.0 + abs(self.mu))

    def summary(self) -> dict:
        return {
            "a": self.a,
            "d": self.d,
            "Rsupp": self.R_supp,
            "mu": self.mu,
            "maxJdev": self.max_J_dev,
            "mass": self.mass,
            "Mphys": self.mphys,
            "infinite_mass": self.infinite_mass,
        }


@dataclass(frozen=True)
class PsiResult:
    psi: np.ndarray
    inner: np.ndarray
    truncated: bool
    tail_bound: float


@dataclass(frozen=True)
class SolutionSample:
    t: float
    radius: np.ndarray | float
    rho: np.ndarray | float
    cpot: np.ndarray | float
    s: float


def cumulative_quad4(x, y) -> np.ndarray:
    """Cumulative integral of tabulated ``y(x)`` starting at ``x[0]``.

    Each interval is integrated exactly against the cubic through the four
    nearest nodes, so the rule is fourth order on non-uniform grids.
    Falls back to trapezoids for fewer than four nodes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    out = np.zeros(n)
    if n < 2:
        return out
    if n < 4:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
        return out
    i = np.arange(n - 1)
    start = np.clip(i - 1, 0, n - 4)
    idx = start[:, None] + np.arange(4)[None, :]
    x0 = x[i]
    h = x[i + 1] - x[i]
    # local coordinate t = (x - x0)/h; integrate the interpolant over t in [0, 1]
    t = (x[idx] - x0[:, None]) / h[:, None]
    vander = t[:, :, None] ** np.arange(4)[None, None, :]
    moments = 1.0 / np.arange(1, 5)
    # weights w solve vander^T w = moments
    w = np.linalg.solve(np.transpose(vander, (0, 2, 1)), np.broadcast_to(moments, (n - 1, 4))[..., None])[..., 0]
    seg = h * np.sum(w * y[idx], axis=1)
    out[1:] = np.cumsum(seg)
    return out


def psi_of(r, phi, params: ModelParams, truncated: bool = False) -> PsiResult:
    """Radial Newtonian potential of the profile ``phi`` tabulated on ``r``.

    ``psi(r) = I1(r) / ((d-2) r**(d-2)) + I2(r) / (d-2)`` with
    ``I1 = int_0^r phi s**(d-1) ds`` and ``I2 = int_r^inf phi s ds``. For a
    compactly supported table ``phi`` must vanish at the last node. For
    ``truncated`` (unbounded support) tables ``I2`` is cut at ``r[-1]``
    and ``tail_bound`` estimates the neglected part from the last value,
    ``phi[-1] r[-1]**2 / (2 (d-2))``, which grows without bound as the
    window widens.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    d = params.d
    if r[0] != 0.0:
        raise ValueError("table must start at r = 0")
    if np.any(phi < 0):
        raise ValueError("phi must be non-negative")
    pos = phi > 0
    last = int(np.nonzero(pos)[0][-1]) + 1 if pos.any() else 0
    if not truncated:
        last = min(last + 1, r.size)
    inner = np.zeros_like(r)
    outer = np.zeros_like(r)
    if last >= 2:
        rs = r[:last]
        c1 = cumulative_quad4(rs, phi[:last] * rs ** (d - 1))
        c2 = cumulative_quad4(rs, phi[:last] * rs)
        inner[:last] = c1
        inner[last:] = c1[-1]
        outer[:last] = c2[-1] - c2
    psi = outer / (d - 2)
    nz = r > 0
    psi[nz] += inner[nz] / ((d - 2) * r[nz] ** (d - 2))
    # removable singularity: I1 ~ phi(0) r**d / d near the origin
    tiny = nz & (r < 1e-6 * max(r[-1], 1.0))
    psi[tiny] = outer[tiny] / (d - 2) + phi[0] * r[tiny] ** 2 / (d * (d - 2))
    tail = phi[-1] * r[-1] ** 2 / (2.0 * (d - 2)) if truncated else 0.0
    return PsiResult(psi, inner, truncated, tail)


def J_of(r, phi, psi, params: ModelParams) -> np.ndarray:
    xi = phi ** (1.0 / params.p)
    return params.xi_coefficient * xi - psi - 0.5 * np.asarray(r) ** 2


def check_J(table: ProfileTable):
    """Return ``(mu, max |J + mu|)`` over support nodes, ``mu = -mean(J)``."""
    mask = table.support
    if not mask.any():
        return 0.0, 0.0
    J = table.J[mask]
    mu = -float(np.mean(J))
    return mu, float(np.max(np.abs(J + mu)))


def poisson_residual(table: ProfileTable) -> float:
    """``max |psi'' + (d-1)/r psi' + phi|`` at interior support nodes.

    Three-point differences on the (possibly non-uniform) table grid;
    second order when the grid is uniform.
    """
    r, psi, phi = table.r, table.psi, table.phi
    d = table.d
    idx = np.arange(1, r.size - 1)
    idx = idx[(r[idx] < table.R_supp) & (r[idx] > 0)]
    if idx.size == 0:
        return 0.0
    hm = r[idx] - r[idx - 1]
    hp = r[idx + 1] - r[idx]
    d2 = 2.0 * (psi[idx + 1] * hm - psi[idx] * (hm + hp) + psi[idx - 1] * hp) / (hm * hp * (hm + hp))
    d1 = (psi[idx + 1] * hm**2 - psi[idx - 1] * hp**2 + psi[idx] * (hp**2 - hm**2)) / (hm * hp * (hm + hp))
    lap = d2 + (d - 1) / r[idx] * d1
    return float(np.max(np.abs(lap + phi[idx])))


def _sample_u(traj, s_end, spec: GridSpec, params, a, forcing=1.0):
    """u-variable radii and values on [0, s_end] from a dense trajectory."""
    r0 = traj.r[0]
    if spec.n_uniform:
        s = np.linspace(0.0, s_end, spec.n_uniform)
    else:
        k = max(1, spec.per_step)
        nodes = traj.r[traj.r <= s_end]
        if nodes[-1] < s_end:
            nodes = np.append(nodes, s_end)
        frac = np.arange(k) / k
        inner = (nodes[:-1, None] + np.diff(nodes)[:, None] * frac[None, :]).ravel()
        head = np.linspace(0.0, r0, 4, endpoint=False)
        s = np.concatenate([head, inner, [s_end]])
    u = np.empty_like(s)
    du = np.empty_like(s)
    small = s < r0
    for j in np.nonzero(small)[0]:
        st = series_start(a, params, s[j], forcing) if s[j] > 0 else None
        u[j] = a if st is None else st.u
        du[j] = 0.0 if st is None else st.du
    big = ~small
    vals = traj(s[big])
    u[big] = vals[0]
    du[big] = vals[1]
    return s, u, du


def build_profile(
    a: float,
    params: ModelParams,
    controls: IntegratorControls = DEFAULT_CONTROLS,
    grid: GridSpec = GridSpec(),
    require_compact: bool = False,
) -> ProfileTable:
    """Tabulate phi, Xi, psi and J for shooting height ``a``.

    Heights whose shot reaches zero give a compactly supported,
    finite-mass profile cut at ``R(a)/mu``. Other heights give an
    unbounded-support profile, tabulated on ``[0, grid.r_truncate]`` with
    ``compact=False``.

    Raises
    ------
    NotCrossing
        ``require_compact`` and u(., a) stays positive.
    """
    mu_d = params.mu
    probe = integrate(a, params, controls, StopRule.first_classifying_event(), dense=True)
    compact = probe.stopped_by == "event" and probe.events[-1].kind == U_ZERO_DOWN
    if not compact and require_compact:
        raise NotCrossing(f"a={a!r}: profile has unbounded support")

    if compact:
        traj = probe
        end = traj.events[-1]
        R_shoot = end.r
        s, u, du = _sample_u(traj, R_shoot, grid, params, a)
        u[-1] = 0.0
        u = np.maximum(u, 0.0)
        R_supp = R_shoot / mu_d
        r = s / mu_d
        if grid.margin_points > 0:
            extra = R_supp * (1.0 + grid.margin * np.arange(1, grid.margin_points + 1) / grid.margin_points)
            r = np.concatenate([r, extra])
            u = np.concatenate([u, np.zeros(grid.margin_points)])
        mcal = params.d * params.ball_volume * end.state.mass
        slope = end.state.du
    else:
        s_end = grid.r_truncate * mu_d
        traj = integrate(a, params, controls.replace(r_max=s_end), StopRule.until_rmax(), dense=True)
        s, u, du = _sample_u(traj, traj.r[-1], grid, params, a)
        u = np.maximum(u, 0.0)
        r = s / mu_d
        R_supp = np.inf
        R_shoot = np.inf
        mcal = np.inf
        slope = np.nan

    phi = u_to_phi(u, params)
    psi_res = psi_of(r, phi, params, truncated=not compact)
    psi = psi_res.psi
    J = J_of(r, phi, psi, params)
    d = params.d
    mass = params.sigma * psi_res.inner[-1] if compact else np.inf
    table = ProfileTable(
        a=float(a),
        d=d,
        r=r,
        phi=phi,
        xi=phi ** (1.0 / params.p),
        psi=psi,
        J=J,
        R_supp=R_supp,
        R_shoot=R_shoot,
        mu=0.0,
        max_J_dev=0.0,
        mass=mass,
        mcal=mcal,
        mphys=params.mass_factor * mcal,
        u_slope_at_edge=slope,
        compact=compact,
        psi_tail_bound=psi_res.tail_bound,
    )
    table.mu, table.max_J_dev = check_J(table)
    return table


def self_similar_scale(d: int, T: float, t: float) -> float:
    """``s(t) = (d (T - t))**(1/d)``; requires ``0 <= t < T``."""
    if T <= 0:
        raise ValueError("T must be positive")
    if not 0.0 <= t < T:
        raise TimeOutOfRange(f"t={t!r} not in [0, T={T!r})")
    return (d * (T - t)) ** (1.0 / d)


def _interpolants(table: ProfileTable):
    cache = getattr(table, "_interp", None)
    if cache is None:
        cache = (PchipInterpolator(table.r, table.phi, extrapolate=False),
                 PchipInterpolator(table.r, table.psi, extrapolate=False))
        table._interp = cache
    return cache


def _Phi(table: ProfileTable, y):
    phi_i, _ = _interpolants(table)
    out = np.nan_to_num(phi_i(y), nan=0.0)
    if table.compact:
        out = np.where(y >= table.R_supp, 0.0, out)
    return np.maximum(out, 0.0)


def _Psi(table: ProfileTable, y):
    _, psi_i = _interpolants(table)
    out = psi_i(y)
    if table.compact:
        # outside the support the potential is that of a point mass
        far = y > table.r[-1]
        m_over_sigma = table.mass / make_params(table.d).sigma
        out = np.where(far, m_over_sigma / ((table.d - 2) * np.maximum(y, 1e-300) ** (table.d - 2)), out)
    return out


def evaluate_solution(table: ProfileTable, T: float, t: float, radius) -> SolutionSample:
    """Sample ``rho`` and ``c`` of the self-similar solution at time ``t``."""
    s = self_similar_scale(table.d, T, t)
    y = np.asarray(radius, dtype=float) / s
    rho = s ** (-table.d) * _Phi(table, y)
    cpot = s ** (-(table.d - 2)) * _Psi(table, y)
    if np.ndim(radius) == 0:
        rho, cpot = float(rho), float(cpot)
    return SolutionSample(float(t), radius, rho, cpot, s)


def solution_mass(table: ProfileTable, T: float, t: float, n: int = 20001) -> float:
    """Quadrature of ``rho(t, .)`` over R^d on a uniform physical grid."""
    if not table.compact:
        return np.inf
    s = self_similar_scale(table.d, T, t)
    x = np.linspace(0.0, s * table.R_supp, n)
    rho = evaluate_solution(table, T, t, x).rho
    return float(make_params(table.d).sigma * cumulative_quad4(x, rho * x ** (table.d - 1))[-1])


def solution_sup_norm(table: ProfileTable, T: float, t: float) -> float:
    """``max_x rho(t, x)`` sampled at the table nodes (scaled)."""
    s = self_similar_scale(table.d, T, t)
    return float(np.max(evaluate_solution(table, T, t, s * table.r).rho))
