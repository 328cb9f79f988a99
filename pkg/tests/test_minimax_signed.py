import numpy as np
import pytest

from skpsolve import NonlinearitySpec, Problem, State
from skpsolve.minimax import build_endpoints, classify, find_signed_solution, mirror_residual
from skpsolve.minimax.report import sign_changes
from skpsolve.minimax.signed import negative_endpoint, path_nodes_energy
from skpsolve.operator import ConeGeometry


@pytest.fixture(scope="module", params=[0.0, 1.0], ids=["b0", "b1"])
def problem(request, basis255):
    return Problem(basis255.domain, NonlinearitySpec(), a=1.0, b=request.param)


@pytest.fixture(scope="module")
def solved(problem, basis255):
    ends = build_endpoints(problem, basis255, samples=200)
    geo = ConeGeometry(problem.domain, 1 / 64)
    return ends, {s: find_signed_solution(problem, s, basis255, endpoints=ends, geometry=geo)
                  for s in (1, -1)}


def test_positive_solution_postconditions(solved):
    ends, sols = solved
    rep = sols[1]
    assert rep.ok, rep.checks
    assert rep.branch == "positive" and rep.converged and rep.residual <= 1e-9
    assert rep.u.min() >= -1e-8 * np.abs(rep.u).max()
    lo, hi = rep.minimax_level_bracket
    assert lo == ends.c_star and lo <= rep.energy <= hi * (1 + 1e-12)
    assert sign_changes(rep.u) == 0


def test_negative_branch_is_mirror(solved, problem):
    _, sols = solved
    pos, neg = sols[1], sols[-1]
    assert neg.branch == "negative" and neg.ok
    assert np.max(np.abs(pos.u + neg.u)) <= 1e-8
    assert mirror_residual(problem, pos.u) <= 1e-9


def test_path_maximum_trace_nonincreasing(solved):
    _, sols = solved
    rep = sols[1]
    pm, noise = rep.extras["path_max"], rep.extras["noise"]
    assert len(pm) == rep.iterations + 1
    assert all(b <= a + na + nb for a, b, na, nb in zip(pm, pm[1:], noise, noise[1:]))


def test_summary_is_plain_json(solved):
    import json

    _, sols = solved
    text = json.dumps(sols[1].summary(), allow_nan=False)
    assert '"branch": "positive"' in text


def test_path_nodes_and_endpoint(problem, basis255):
    ends = build_endpoints(problem, basis255, samples=100)
    t, en = path_nodes_energy(problem, ends.e_plus, 33)
    assert t[0] == 0 and t[-1] == 1 and en[0] == 0 and en[-1] < 0
    assert np.argmax(en) > 0
    end = negative_endpoint(problem, basis255.vectors[:, 0])
    assert State(problem, end).energy < 0


def test_rejects_bad_sign(problem, basis255):
    with pytest.raises(ValueError):
        find_signed_solution(problem, 0, basis255)


@pytest.mark.parametrize("plus,minus,expected", [
    (1.0, 0.0, "positive"), (0.0, 1.0, "negative"), (1.0, 1.0, "sign-changing"), (0.0, 0.0, "zero"),
])
def test_classify(plus, minus, expected):
    assert classify(plus, minus) == expected


def test_sign_changes_counts_nodes():
    x = np.linspace(0.01, 0.99, 200)
    assert sign_changes(np.sin(3 * np.pi * x)) == 2
    assert sign_changes(np.zeros(5)) == 0
