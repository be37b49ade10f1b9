import pytest

from pks_selfsimilar import DEFAULT_CONTROLS, make_params
from pks_selfsimilar import verify
from pks_selfsimilar.verify import CheckResult, run_all

EXPECTED = {
    "stationary", "energy", "oscillation", "monotone-before-zero", "sensitivity-sign",
    "scaling", "divergence-identity", "lane-emden-identity", "J-gate", "order",
}


@pytest.mark.parametrize("d", [3, 4, 5])
def test_all_checks_pass(d):
    results = run_all(make_params(d))
    assert {r.name for r in results} == EXPECTED
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed


def test_coarse_tolerance_still_passes(params3):
    results = run_all(params3, DEFAULT_CONTROLS.replace(rel_tol=1e-4))
    by_name = {r.name: r for r in results}
    assert by_name["order"].passed
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_failure_lists_counterexample():
    line = CheckResult("x", False, "broken", {"a": 2.0, "r": 0.5}).line()
    assert line.startswith("FAIL x")
    assert "a=2.0" in line and "r=0.5" in line


def test_exceptions_become_failures(params3, crit3, monkeypatch):
    def boom(params, controls, crit):
        raise RuntimeError("kaput")

    monkeypatch.setattr(verify, "CHECKS", [boom])
    (res,) = run_all(params3, crit=crit3)
    assert not res.passed and "kaput" in res.detail
