import io
import json

import pytest

from fraccalc import properties
from fraccalc.config import VerifyParameters
from fraccalc.errors import ValidationError
from fraccalc.properties import PropertyResult

QUICK = [
    "gamma-recurrence",
    "lacroix",
    "semigroup",
    "caputo-constant",
    "reflection",
    "zero-order-limit",
    "nonlocality",
    "rayleigh",
]


def test_property_result_relations():
    assert PropertyResult.compare("p", 1e-6, 1e-5).passed
    assert not PropertyResult.compare("p", 1e-4, 1e-5).passed
    assert PropertyResult.compare("p", 0.0, 0.0).passed
    assert not PropertyResult.compare("p", 0.0, 0.0, "<").passed
    assert PropertyResult.compare("p", 2.0, 1.8, ">=").passed
    assert not PropertyResult.compare("p", float("nan"), 1.0).passed


def test_property_line():
    line = PropertyResult.compare("semigroup", 2.5e-6, 5e-5).line()
    assert line.startswith("semigroup")
    assert "PASS" in line
    assert "bound <= 5.000e-05" in line


def test_registry_names():
    assert "semigroup" in properties.SUITES
    assert "stationarity" in properties.SUITES
    assert len(properties.SUITES) == 21


def test_quick_suites_pass_on_default_grid():
    results = properties.run_suites(VerifyParameters(), QUICK)
    assert [r.name for r in results] == QUICK
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_coarse_grid_fails_semigroup():
    (result,) = properties.run_suites(VerifyParameters(grid=33), ["semigroup"])
    assert not result.passed
    assert result.deviation > result.bound


def test_unknown_suite():
    with pytest.raises(ValidationError, match="unknown property"):
        properties.run_suites(VerifyParameters(), ["no-such-property"])


def test_report():
    results = [PropertyResult.compare("semigroup", 1e-6, 5e-5), PropertyResult.compare("lacroix", 1.0, 1e-3)]
    buf = io.StringIO()
    properties.write_report(results, VerifyParameters(grid=65), buf)
    report = json.loads(buf.getvalue())
    assert report["parameters"]["grid"] == 65
    assert report["properties"]["semigroup"]["passed"] is True
    assert report["passed"] is False


def test_rayleigh_suite_varies_the_path():
    results = [properties.SUITES["rayleigh"](VerifyParameters(seed=seed)) for seed in (1, 2, 3)]
    assert all(r.passed for r in results)
    assert all(r.deviation <= 1e-12 for r in results)
