"""Dimension-dependent constants and the u <-> phi transform.

All quantities are dimensionless. For a space dimension ``d >= 3`` the
critical diffusion exponent is ``m_d = 2(d-1)/d`` and the shooting equation
has nonlinearity exponent ``p = d/(d-2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = ["ModelParams", "make_params", "u_to_phi", "phi_to_u", "gamma_half_integer"]


def gamma_half_integer(n: int) -> float:
    """Return Gamma(n/2) for a positive integer ``n`` via closed forms."""
    if n < 1:
        raise DomainError("gamma_half_integer needs n >= 1")
    if n % 2 == 0:
        return float(math.factorial(n // 2 - 1))
    # Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
    k = (n - 1) // 2
    return math.factorial(2 * k) / (4**k * math.factorial(k)) * math.sqrt(math.pi)


@dataclass(frozen=True)
class ModelParams:
    """Constants derived once from the dimension ``d``.

    Attributes
    ----------
    d : int
        Space dimension.
    p : float
        Exponent of the shooting nonlinearity, ``d/(d-2)``.
    m : float
        Diffusion exponent ``2(d-1)/d``.
    lam : float
        Amplitude scale ``d**((d-2)/d)`` (phi = lam**p * u**p).
    mu : float
        Radial scale ``d**(1/d) * sqrt((d-2)/(2(d-1)))``.
    sigma : float
        Area of the unit sphere in R^d.
    c_newton : float
        Newtonian kernel constant ``1/((d-2) sigma)``.
    ball_volume : float
        Volume of the unit ball, ``sigma/d``.
    mass_factor : float
        Physical mass per unit of the shooting mass functional, ``d * mu**-d``.
    mass_factor_printed : float
        ``d**(1/d) (2(d-1)/(d-2))**((d-1)/2)``; equals ``d * mu**-(d-1)``
        and is kept for comparison only (one radial Jacobian factor short).
    """

    d: int
    p: float = field(init=False)
    p_exact: Fraction = field(init=False, repr=False)
    m: float = field(init=False)
    lam: float = field(init=False)
    mu: float = field(init=False)
    sigma: float = field(init=False)
    c_newton: float = field(init=False)
    ball_volume: float = field(init=False)
    mass_factor: float = field(init=False)
    mass_factor_printed: float = field(init=False)

    def __post_init__(self):
        d = self.d
        if isinstance(d, bool) or not isinstance(d, int):
            raise DomainError(f"d must be an integer, got {d!r}")
        if d < 3:
            raise DomainError(f"d must be ≥ 3 (got {d})")
        p_exact = Fraction(d, d - 2)
        sigma = 2.0 * math.pi ** (d / 2) / gamma_half_integer(d)
        mu = d ** (1.0 / d) * math.sqrt((d - 2) / (2.0 * (d - 1)))
        values = {
            "p": float(p_exact),
            "p_exact": p_exact,
            "m": 2.0 * (d - 1) / d,
            "lam": d ** ((d - 2) / d),
            "mu": mu,
            "sigma": sigma,
            "c_newton": 1.0 / ((d - 2) * sigma),
            "ball_volume": sigma / d,
            "mass_factor": (2.0 * (d - 1) / (d - 2)) ** (d / 2),
            "mass_factor_printed": d ** (1.0 / d) * (2.0 * (d - 1) / (d - 2)) ** ((d - 1) / 2),
        }
        for name, value in values.items():
            object.__setattr__(self, name, value)

    @property
    def lam_p(self) -> float:
        """``lam**p``, which is exactly ``d``."""
        return float(self.d)

    @property
    def xi_coefficient(self) -> float:
        """``2(d-1)/(d-2)``, the coefficient of Xi in the first integral J."""
        return 2.0 * (self.d - 1) / (self.d - 2)

    @property
    def critical_energy_height(self) -> float:
        """``(p+1)**(1/p)``; every a below it keeps u positive."""
        return (self.p + 1.0) ** (1.0 / self.p)


def make_params(d: int) -> ModelParams:
    """Build the constants for dimension ``d`` (integer, ``d >= 3``)."""
    return ModelParams(d)


def u_to_phi(u, params: ModelParams):
    """Map shooting values ``u >= 0`` to the density profile ``lam**p u**p``.

    Works elementwise on arrays. Negative inputs are rejected because
    profiles are truncated at the first zero of u.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("u_to_phi needs non-negative u")
    out = params.lam_p * arr**params.p
    return float(out) if np.ndim(out) == 0 else out


def phi_to_u(phi, params: ModelParams):
    """Inverse of :func:`u_to_phi`."""
    arr = np.asarray(phi, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("phi_to_u needs non-negative phi")
    out = (arr / params.lam_p) ** (1.0 / params.p)
    return float(out) if np.ndim(out) == 0 else out
