import json

import pytest

from skpsolve import HypothesisViolation, NonlinearitySpec, Problem
from skpsolve.verify import CHECK_NAMES, CheckReport, format_text, run_all, to_json


@pytest.fixture(scope="module")
def reports(default_problem):
    return run_all(default_problem, seed=42)


def test_all_checks_pass_at_defaults(reports):
    failed = [r.name for r in reports if not r.passed]
    assert not failed, format_text(reports)


def test_report_order_and_names(reports):
    assert tuple(r.name for r in reports) == CHECK_NAMES


def test_reports_deterministic(default_problem, reports):
    again = run_all(default_problem, seed=42)
    assert to_json(again) == to_json(reports)


def test_measured_constants_reported(reports):
    by_name = {r.name: r for r in reports}
    mp = by_name["mountain_pass_sphere"].measured
    assert mp["min_J_on_sphere"] >= mp["c_star"] > 0
    radius = by_name["cone_radius_vs_delta"].measured
    assert 0 < radius["mu"] < min(radius["delta_m"], radius["inv_m"])
    floor = by_name["double_boundary_energy"].measured
    assert floor["min_J"] >= floor["floor"]


def test_json_and_text_output(reports):
    data = json.loads(to_json(reports))
    assert [d["name"] for d in data] == list(CHECK_NAMES)
    assert all(isinstance(d["passed"], bool) for d in data)
    text = format_text(reports)
    assert text.splitlines()[-1] == f"{len(CHECK_NAMES)}/{len(CHECK_NAMES)} checks passed"


def test_small_exponent_rejected_before_checks(dom255):
    with pytest.raises(HypothesisViolation, match=r"\(f1\)"):
        Problem(dom255, NonlinearitySpec(p=3.0))


def test_check_report_dict():
    rep = CheckReport("x", True, {"n": 3, "v": 0.5, "ok": True}, 1e-3, "d")
    assert rep.as_dict() == {"name": "x", "passed": True, "measured": {"n": 3, "v": 0.5, "ok": True},
                             "tolerance": 1e-3, "details": "d"}
