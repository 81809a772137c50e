import numpy as np
import pytest

from dilres import checks
from dilres.checks import CheckResult, run_suites


def test_check_exception_recorded_and_run_continues(monkeypatch):
    def boom(cfg, seed, ov):
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(checks.SUITES, "boom", boom)
    results = run_suites(["boom", "fine_structure"], {}, seed=0)
    names = [r.name for r in results]
    assert "boom.exception" in names
    rec = next(r for r in results if r.name == "boom.exception")
    assert not rec.passed
    assert "synthetic failure" in rec.info["error"]
    # the later suite still ran
    assert any(n.startswith("fine_structure.") for n in names)


def test_unknown_suite_raises():
    with pytest.raises(KeyError):
        run_suites(["no-such-suite"], {}, seed=0)


def test_tolerance_override_forces_failures():
    tight = {k: 1e-16 for k in checks.DEFAULTS}
    results = checks.fine_structure_suite(overrides=tight)
    assert any(not r.passed for r in results)


def test_results_serialize():
    r = CheckResult("demo", 1.0, 2.0, True, {"extra": 1})
    d = r.to_dict()
    assert d == {"name": "demo", "measured": 1.0, "bound": 2.0,
                 "passed": True, "info": {"extra": 1}}
    r2 = CheckResult("demo", 1.0, 2.0, True)
    assert "info" not in r2.to_dict()


def test_protection_negative_control_scales_with_perturbation():
    weak = checks.protection_suite(perturbation=1e-3)
    split = next(r for r in weak if "split" in r.name)
    assert split.passed
    assert split.measured == pytest.approx(1e-3, rel=0.2)
