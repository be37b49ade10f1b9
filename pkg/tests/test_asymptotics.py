import numpy as np
import pytest

from pks_selfsimilar import DEFAULT_CONTROLS, lane_emden, make_params, sup_distance_to_lane_emden
from pks_selfsimilar.asymptotics import mcal_limit_check, rescaled_u, v_trajectory
from pks_selfsimilar import StopRule, integrate

# frozen after the fixed-step RK4 oracle run (see test_ode.py)
Z1_D3 = 6.8968486194
BOUNDARY_D3 = 2.01823595095


def test_lane_emden_regression_d3(lane3):
    assert lane3.z1 == pytest.approx(Z1_D3, abs=1e-9)
    assert lane3.boundary_term == pytest.approx(BOUNDARY_D3, rel=1e-10)
    assert lane3.slope_at_z1 < 0


def test_lane_emden_quadrature_identity(lane3):
    assert lane3.identity_residual < 1e-6


@pytest.mark.parametrize("d, z1, mcal", [(4, 6.34651100, 221.4390918), (5, 6.78426942, 1909.332475)])
def test_lane_emden_other_dimensions(d, z1, mcal):
    lane = lane_emden(make_params(d))
    assert lane.z1 == pytest.approx(z1, abs=1e-7)
    assert lane.mcal_limit == pytest.approx(mcal, rel=1e-8)


def test_limit_mass_from_boundary_term(params3, lane3):
    expected = params3.d * params3.ball_volume * lane3.boundary_term
    assert lane3.mcal_limit == pytest.approx(expected, rel=1e-15)


def test_v_converges_to_w(params3, lane3):
    dist = [sup_distance_to_lane_emden(a, lane3.z1, params3) for a in (1e1, 1e2, 1e3, 1e4)]
    assert all(x > y for x, y in zip(dist, dist[1:]))
    assert dist[-1] < 1e-3


def test_v_equation_is_rescaled_u(params3, lane3):
    a = 20.0
    shrink = a ** (-(params3.p - 1) / 2)
    u = integrate(a, params3, DEFAULT_CONTROLS.replace(r_max=1.1 * lane3.z1 * shrink), StopRule.until_rmax(), dense=True)
    v = v_trajectory(a, params3, DEFAULT_CONTROLS.replace(r_max=1.1 * lane3.z1), StopRule.until_rmax())
    r = np.linspace(0.01, lane3.z1, 200)
    np.testing.assert_allclose(v(r)[0], rescaled_u(u, r, params3), atol=1e-7)


def test_mass_deviation_decreases(params3, lane3):
    rows = mcal_limit_check([1e2, 1e3, 1e4], params3, lane=lane3)
    dev = [row[2] for row in rows]
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] / lane3.mcal_limit < 1e-2
