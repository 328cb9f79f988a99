"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the "acceptance criteria" section of the pytest
terminal summary.
"""

import csv
import json
import time

import numpy as np
import pytest

from skpsolve import NonlinearitySpec, Problem, State, apply_A, build_domain, eigenbasis, random_function
from skpsolve.cli import main
from skpsolve.energy import ar_gap
from skpsolve.export import strip_timestamps
from skpsolve.minimax import build_endpoints, fountain_estimates, fountain_trends, multi_start_sign_changing
from skpsolve.operator import cone_contraction_check, default_geometry, norm_bound_constant
from skpsolve.poisson import closed_form_phi_sine, phi_bound_constant, solve_phi
from skpsolve.verify import FD_STEP

pytestmark = pytest.mark.slow


def _profile(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["u"]) for r in rows])


@pytest.fixture(scope="module")
def signed_runs(tmp_path_factory):
    runs = {}
    for branch in ("positive", "negative"):
        out = tmp_path_factory.mktemp(branch)
        t0 = time.perf_counter()
        code = main(["solve", "--branch", branch, "--output", str(out)])
        runs[branch] = {"code": code, "seconds": time.perf_counter() - t0,
                        "json": json.loads((out / "solution.json").read_text()),
                        "u": _profile(out / "profile.csv")}
    return runs


def test_criterion_01_poisson_closed_form(dom1023, record_acceptance):
    x = dom1023.coords[:, 0]
    u = np.sqrt(2) * np.sin(np.pi * x)
    t0 = time.perf_counter()
    phi = solve_phi(dom1023, u).phi
    seconds = time.perf_counter() - t0
    err = float(np.max(np.abs(phi - closed_form_phi_sine(x))))
    ok = err <= 1e-5 and seconds < 0.1
    record_acceptance(1, ok, f"max nodal error {err:.2e} (<= 1e-5), {seconds * 1e3:.2f} ms (< 100 ms)")
    assert ok


def test_criterion_02_potential_battery(dom1023, basis1023, record_acceptance):
    rng = np.random.default_rng(2)
    min_phi, weak, hom = np.inf, 0.0, 0.0
    for _ in range(500):
        u = random_function(basis1023, rng)
        sol = solve_phi(dom1023, u)
        min_phi = min(min_phi, float(sol.phi.min()))
        weak = max(weak, abs(sol.dirichlet_energy - sol.pairing) / sol.pairing)
        if _ < 50:
            for t in (0.5, 2.0, 10.0):
                scaled = solve_phi(dom1023, t * u).phi
                hom = max(hom, float(np.max(np.abs(scaled - t * t * sol.phi) / np.max(t * t * sol.phi))))
    c = [phi_bound_constant(dom1023, basis1023, 1000, np.random.default_rng(s), ascent=False)
         for s in (11, 12)]
    C = phi_bound_constant(dom1023, basis1023, 1000, np.random.default_rng(11))
    worst = max(solve_phi(dom1023, u).pairing / (C**2 * dom1023.h1_inner(u, u) ** 2)
                for u in (random_function(basis1023, rng, norm=rng.uniform(0.1, 10)) for _ in range(500)))
    spread = abs(c[0] - c[1]) / max(c)
    ok = (min_phi >= 0 and hom <= 1e-12 and weak <= 1e-10 and np.isfinite(C) and worst <= 1
          and spread <= 0.10)
    record_acceptance(2, ok, f"min phi {min_phi:.2e} >= 0, homogeneity {hom:.1e}, weak form {weak:.1e}, "
                             f"C_meas {C:.4f} (seed spread {spread:.1%}), max pairing/(C^2|u|^4) {worst:.3f}")
    assert ok


def test_criterion_03_gradient(dom1023, basis1023, record_acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        for b in (0.0, 1.0):
            for p in (4.5, 5.0, 5.5):
                pb = Problem(dom1023, NonlinearitySpec(p=p), a=a, b=b)
                for _ in range(50):
                    u, v = random_function(basis1023, rng), random_function(basis1023, rng)
                    exact = dom1023.h1_inner(State(pb, u).gradient.g, v)
                    d = FD_STEP
                    fd = (State(pb, u + d * v).energy - State(pb, u - d * v).energy) / (2 * d)
                    worst = max(worst, abs(fd - exact) / abs(exact))
    ok = worst <= 1e-6
    record_acceptance(3, ok, f"max relative FD error {worst:.2e} over 18 parameter sets x 50 pairs (<= 1e-6)")
    assert ok


def test_criterion_04_auxiliary_operator(default_problem, basis1023, record_acceptance):
    pb, rng = default_problem, np.random.default_rng(4)
    bound = norm_bound_constant(pb, basis1023, rng=rng)
    pair_gap, norm_ratio = np.inf, 0.0
    for _ in range(200):
        u = random_function(basis1023, rng, norm=rng.uniform(0.1, 5.0))
        st = State(pb, u)
        aux = apply_A(pb, u, st)
        pair_gap = min(pair_gap, aux.pairing - pb.a * aux.residual**2)
        norm_ratio = max(norm_ratio, st.gradient.norm / ((pb.a + bound.C * st.norm_sq) * aux.residual))
    ok = pair_gap >= -1e-10 and norm_ratio <= 1 + 1e-6
    record_acceptance(4, ok, f"min <J',u-Au> - a|u-Au|^2 = {pair_gap:.2e} (>= -1e-10), max |J'|/bound "
                             f"{norm_ratio:.6f} (<= 1+1e-6) with C_meas = {bound.C:.5f}")
    assert ok


def test_criterion_05_superlinearity_gap(default_problem, basis1023, record_acceptance):
    rng = np.random.default_rng(5)
    worst = min(_gap(default_problem, random_function(basis1023, rng, norm=rng.uniform(0.05, 20)))
                for _ in range(500))
    ok = worst >= -1e-10
    record_acceptance(5, ok, f"min gap minus bound {worst:.2e} over 500 samples (>= -1e-10)")
    assert ok


def _gap(pb, u):
    g = ar_gap(pb, u)
    return g.gap - g.lower_bound


def test_criterion_06_cone_contraction(default_problem, basis1023, record_acceptance):
    geo, _, delta = default_geometry(default_problem, basis1023, 32, rng=np.random.default_rng(6))
    rep = cone_contraction_check(default_problem, geo, basis1023, 200, np.random.default_rng(66))
    ok = rep.failures == 0 and rep.trials == 200
    record_acceptance(6, ok, f"mu_m = {geo.mu:.4g} (delta_m {delta:.4f}): {rep.failures}/200 failures, "
                             f"worst ratio {rep.worst_ratio:.2e}")
    assert ok


def test_criterion_07_signed_solutions(signed_runs, default_problem, basis1023, record_acceptance):
    pos, neg = signed_runs["positive"], signed_runs["negative"]
    rep = pos["json"]["report"]
    u = pos["u"]
    c_star = build_endpoints(default_problem, basis1023).c_star
    nodal_ok = bool(np.all(u >= -1e-8 * np.max(np.abs(u))))
    mirror = float(np.max(np.abs(neg["u"] + u)))
    ok = (pos["code"] == 0 and rep["converged"] and rep["residual"] <= 1e-9 and pos["seconds"] < 30
          and nodal_ok and rep["energy"] >= c_star and neg["code"] == 0 and mirror <= 1e-8)
    record_acceptance(7, ok, f"residual {rep['residual']:.2e}, {pos['seconds']:.1f} s, J {rep['energy']:.6g} "
                             f">= c_* {c_star:.4g}, nodewise sign ok {nodal_ok}, mirror diff {mirror:.1e}")
    assert ok


def test_criterion_08_sign_changing(tmp_path, record_acceptance):
    code = main(["solve", "--branch", "sign-changing", "--output", str(tmp_path)])
    rep = json.loads((tmp_path / "solution.json").read_text())["report"]
    ex = rep["extras"]
    part = min(rep["norm_plus"], rep["norm_minus"])
    floor = 1.0 * ex["mu"] ** 2 / 8
    sweeps = ex["sweeps"]["intersection"]
    ok = (code == 0 and rep["converged"] and part >= ex["alpha"] > 0 and rep["energy"] > floor
          and all(sweeps))
    record_acceptance(8, ok, f"min part norm {part:.4g} >= alpha {ex['alpha']:.4g}, J {rep['energy']:.4g} > "
                             f"a mu^2/8 = {floor:.2e}, intersection on {sum(sweeps)}/{len(sweeps)} sweeps")
    assert ok


def test_criterion_09_fountain_trends(default_problem, basis1023, record_acceptance):
    rows = fountain_estimates(default_problem, basis1023, range(2, 11))
    tr = fountain_trends(rows)
    beta = np.array([r.beta for r in rows])
    ok = (tr["beta_positive"] and bool(np.all(np.diff(beta) <= 0)) and tr["r_nondecreasing"]
          and tr["b_lower_ratio"] >= 2)
    record_acceptance(9, ok, f"beta {beta[0]:.4f} -> {beta[-1]:.4f} nonincreasing, r_k {rows[0].r:.3g} -> "
                             f"{rows[-1].r:.3g}, b_10/b_2 = {tr['b_lower_ratio']:.1f} (>= 2)")
    assert ok


def test_criterion_10_multi_start(default_problem, basis1023, record_acceptance):
    pb = default_problem
    res = multi_start_sign_changing(pb, basis1023, 3, 64, seed=42)
    sols = res.solutions
    dom = pb.domain
    bound = norm_bound_constant(pb, basis1023, rng=np.random.default_rng(10))
    pair_ok, norm_ok = True, True
    for s in sols:
        st = State(pb, s.u)
        aux = apply_A(pb, s.u, st)
        pair_ok &= aux.pairing >= pb.a * aux.residual**2 - 1e-10
        norm_ok &= st.gradient.norm <= (pb.a + bound.C * st.norm_sq) * aux.residual * (1 + 1e-6)
    dists = [dom.h1_norm(a.u - b.u) for i, a in enumerate(sols) for b in sols[i + 1:]]
    mirrors = [apply_A(pb, -s.u).residual for s in sols]
    ok = (len(sols) >= 2 and all(s.branch == "sign-changing" for s in sols) and min(dists) > 1e-3
          and pair_ok and norm_ok and max(mirrors) <= 1e-9)
    record_acceptance(10, ok, f"found {len(sols)} distinct sign-changing solutions from 64 starts "
                              f"(min H1 distance {min(dists, default=0):.3g}, {len(res.levels())} level(s)), "
                              f"max mirror residual {max(mirrors, default=np.nan):.2e}")
    assert ok


def test_criterion_11_determinism(tmp_path, record_acceptance):
    texts = []
    for _ in range(2):
        assert main(["solve", "--branch", "positive", "--output", str(tmp_path)]) == 0
        texts.append((tmp_path / "solution.json").read_text())
    stripped = ["\n".join(line for line in t.splitlines() if '"created"' not in line) for t in texts]
    parsed = [strip_timestamps(json.loads(t)) for t in texts]
    ok = stripped[0] == stripped[1] and parsed[0] == parsed[1]
    record_acceptance(11, ok, f"two runs give byte-identical solution.json apart from the timestamp "
                              f"({len(stripped[0])} bytes)")
    assert ok


def test_acceptance_uses_default_grid(dom1023):
    assert dom1023.n == 1023 and build_domain(1, 1023).h == dom1023.h
    assert eigenbasis(dom1023, 32).m_max == 32
