import numpy as np
import pytest

from pks_selfsimilar import (
    DEFAULT_CONTROLS,
    InvalidBracket,
    NotCrossing,
    classify,
    dR_da,
    find_critical,
    first_zero,
    make_params,
    positivity_components,
    theta_zero,
    xi_samples,
)
from pks_selfsimilar.shooting import CROSSES_ZERO, POSITIVE_FOREVER, scaled_radius

from oracles import central_difference

A_C3 = 5.34635247  # frozen after the bisection oracle run (relTol 1e-10 and 1e-12 agree)


def test_classify_brackets_between_3_and_7(params3):
    assert classify(3.0, params3).kind == POSITIVE_FOREVER
    assert classify(7.0, params3).kind == CROSSES_ZERO


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 1.5, 2.0])
def test_small_heights_stay_positive(params3, a):
    c = classify(a, params3)
    assert not c.crosses
    if a != 1.0:
        assert 0 < c.witness_value < 1 or c.witness_value > 1


def test_classify_rejects_nonpositive(params3):
    with pytest.raises(ValueError):
        classify(0.0, params3)


def test_critical_height_regression(crit3):
    assert crit3.a_lo < A_C3 + 5e-9 and crit3.a_hi > A_C3 - 5e-9
    assert crit3.width <= 1e-8
    assert abs(crit3.a_c - A_C3) < 1e-8
    assert crit3.R_touch == pytest.approx(1.8497, abs=1e-3)


def test_critical_height_bracket_straddles(params3, crit3):
    assert not classify(crit3.a_lo, params3).crosses
    assert classify(crit3.a_hi, params3).crosses


@pytest.mark.parametrize("d, value", [(4, 10.08185854), (5, 17.14818020)])
def test_critical_height_other_dimensions(d, value):
    crit = find_critical(make_params(d), tol=1e-8)
    assert abs(crit.a_c - value) < 2e-8


def test_critical_height_exceeds_energy_bound(params3, crit3):
    # heights below (p+1)**(1/p) have E(0) < 0 and cannot reach zero
    assert crit3.a_c > params3.critical_energy_height


def test_explicit_bracket(params3):
    crit = find_critical(params3, (3.0, 7.0), tol=1e-6)
    assert abs(crit.a_c - A_C3) < 1e-6


@pytest.mark.parametrize("bracket", [(6.0, 7.0), (3.0, 4.0), (7.0, 3.0), (-1.0, 7.0)])
def test_invalid_bracket(params3, bracket):
    with pytest.raises(InvalidBracket):
        find_critical(params3, bracket)


def test_not_crossing_below_critical(params3):
    with pytest.raises(NotCrossing):
        first_zero(3.0, params3)


def test_first_zero_decreases(params3, crit3):
    a = crit3.a_c * np.array([1.01, 2.0, 10.0, 100.0])
    R = [first_zero(x, params3)[0] for x in a]
    assert all(x > y for x, y in zip(R, R[1:]))


@pytest.mark.parametrize("factor", [1.2, 2.0, 10.0])
def test_dR_da_matches_central_difference(params3, crit3, factor):
    a = factor * crit3.a_c
    fd = central_difference(lambda x: first_zero(x, params3)[0], a, 1e-4 * a)
    assert dR_da(a, params3) == pytest.approx(fd, rel=1e-4)
    assert dR_da(a, params3) < 0


@pytest.mark.parametrize("factor", [1.2, 2.0, 10.0])
def test_sensitivity_sign_structure(params3, crit3, factor):
    a = factor * crit3.a_c
    tz = theta_zero(a, params3)
    assert 0 < tz.z < tz.R
    assert tz.u_at_z > 1.0
    assert tz.theta_at_R < 0
    r, xi = xi_samples(a, params3, 100)
    assert r.shape == xi.shape == (100,)
    assert np.all(xi > 0)


def test_scaled_radius_tends_to_lane_emden_zero(params3, lane3):
    a = 1e6
    R, _ = first_zero(a, params3)
    assert scaled_radius(a, R, params3) == pytest.approx(lane3.z1, rel=1e-3)


@pytest.mark.parametrize("a, count", [(50.0, 2), (90.0, 3)])
def test_multi_hump_counts(params3, crit3, a, count):
    comps = positivity_components(a, params3, r_limit=5 * crit3.R_touch)
    assert len(comps) == count
    assert comps[0].start == 0.0
    assert all(c.closed for c in comps)
    assert all(c.end > c.start for c in comps)
    assert all(x.end < y.start for x, y in zip(comps, comps[1:]))


def test_multi_hump_tail_is_optional(params3, crit3):
    comps = positivity_components(50.0, params3, r_limit=5 * crit3.R_touch, include_tail=True)
    assert len(comps) == 3 and not comps[-1].closed


def test_single_hump_just_above_critical(params3, crit3):
    comps = positivity_components(crit3.a_c * 1.001, params3, r_limit=5 * crit3.R_touch)
    assert len(comps) == 1


def test_max_components_truncates(params3):
    comps = positivity_components(90.0, params3, r_limit=20.0, max_components=2)
    assert len(comps) == 2


def test_classification_stable_under_tolerance(params3):
    ctl = DEFAULT_CONTROLS.replace(rel_tol=1e-8, abs_tol=1e-10)
    for a in (3.0, 5.3, 5.4, 7.0):
        assert classify(a, params3, ctl).kind == classify(a, params3).kind
