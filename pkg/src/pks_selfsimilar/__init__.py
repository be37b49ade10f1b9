"""Radially symmetric self-similar blow-up profiles of the critical
degenerate Keller-Segel (Smoluchowski-Poisson) system.

The profile problem reduces to the shooting equation::

    u'' + (d-1)/r u' + |u|**(p-1) u - 1 = 0,  u(0) = a,  u'(0) = 0,

with ``p = d/(d-2)``. Heights above the critical value ``a_c`` give
compactly supported profiles whose masses fill the window ``(M_c, M_2]``.
"""

from .asymptotics import LaneEmdenResult, lane_emden, sup_distance_to_lane_emden, v_trajectory
from .errors import (
    AmbiguousNearCritical,
    BudgetExceeded,
    DomainError,
    InconsistentDimension,
    InvalidBracket,
    MultipleThetaZeros,
    NotCrossing,
    ProfileError,
    StepUnderflow,
    TimeOutOfRange,
)
from .mass import MassCurve, MassCurvePoint, ScanError, default_grid, mass_of, mass_point, scan, thresholds
from .ode import DEFAULT_CONTROLS, IntegratorControls, ShootState, StopRule, Trajectory, integrate
from .params import ModelParams, make_params, phi_to_u, u_to_phi
from .profile import (
    GridSpec,
    ProfileTable,
    build_profile,
    check_J,
    evaluate_solution,
    poisson_residual,
    psi_of,
    self_similar_scale,
    solution_mass,
    solution_sup_norm,
)
from .shooting import (
    classify,
    dR_da,
    find_critical,
    first_zero,
    positivity_components,
    shoot_to_zero,
    theta_zero,
    xi_samples,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
