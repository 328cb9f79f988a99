"""Battery of numerical checks of the structural inequalities behind the solvers.

Each check draws its random functions from its own child of
``numpy.random.SeedSequence(seed)``, so reports are reproducible and do not
depend on which other checks ran.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import build_domain, eigenbasis, random_function, sobolev_constant
from .energy import Problem, State, ar_gap
from .minimax.endpoints import (build_endpoints, choose_R, constant_map, intersection_check,
                                linear_map, second_mode)
from .nonlinearity import NonlinearitySpec, ar_check, growth_bound
from .operator import (apply_A, cone_contraction_check, default_geometry,
                       negative_part, norm_bound_constant, positive_part)
from .poisson import closed_form_phi_sine, phi_bound_constant, solve_phi

# central-difference step: near eps^(1/3) for unit-norm u, v; smaller steps let
# rounding in J dominate whenever the directional derivative is small
FD_STEP = 1e-4

CHECK_NAMES = (
    "hypotheses",
    "poisson_closed_form",
    "potential_properties",
    "gradient_consistency",
    "auxiliary_operator",
    "ar_gap",
    "cone_contraction",
    "cone_radius_vs_delta",
    "mountain_pass_sphere",
    "double_tube_embedding",
    "double_boundary_energy",
    "simplex_intersection",
)


@dataclass
class CheckReport:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: float = 0.0
    details: str = ""

    def as_dict(self):
        d = asdict(self)
        d["passed"] = bool(self.passed)
        d["measured"] = {k: _num(v) for k, v in self.measured.items()}
        d["tolerance"] = float(self.tolerance)
        return d


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def check_hypotheses(problem, basis, rng):
    spec = problem.nonlinearity
    rep = ar_check(spec, 10_000, rng, coords=problem.domain.coords)
    c = growth_bound(spec, 0.0, coords=problem.domain.coords)
    t = rng.uniform(-10, 10, 10_000)
    x = problem.domain.coords[rng.integers(0, problem.domain.size, t.size)]
    kap = spec.kappa_values(x)
    growth_ok = bool(np.all(np.abs(spec.f(t, kap)) <= c * np.abs(t) ** (spec.p - 1) * (1 + 1e-14)))
    return CheckReport(
        "hypotheses", rep.passed and growth_ok,
        {"ar_worst_ratio": rep.worst_ratio, "growth_constant": c, "p": spec.p, "mu": spec.mu},
        0.0, "0 < mu F <= t f on 1e4 samples; |f| <= c |t|^(p-1) on 1e4 samples",
    )


def check_poisson_closed_form(problem, basis, rng, n=None):
    dom = problem.domain if problem.domain.dim == 1 else build_domain(1, n or 1023)
    x = dom.coords[:, 0]
    sol = solve_phi(dom, np.sqrt(2.0) * np.sin(np.pi * x))
    err = float(np.max(np.abs(sol.phi - closed_form_phi_sine(x))))
    return CheckReport("poisson_closed_form", err <= 1e-5, {"max_error": err, "n": dom.n}, 1e-5,
                       "potential of sqrt(2) sin(pi x) against its closed form")


def check_potential(problem, basis, rng, trials=500):
    dom = problem.domain
    min_phi, hom, weak = np.inf, 0.0, 0.0
    for _ in range(trials):
        u = random_function(basis, rng)
        sol = solve_phi(dom, u)
        min_phi = min(min_phi, float(sol.phi.min()))
        weak = max(weak, _rel(sol.pairing, sol.dirichlet_energy))
    for _ in range(20):
        u = random_function(basis, rng)
        phi = solve_phi(dom, u).phi
        for t in (0.5, 2.0, 10.0):
            scaled = solve_phi(dom, t * u).phi
            hom = max(hom, float(np.max(np.abs(scaled - t * t * phi)) / np.max(np.abs(t * t * phi))))
    seeds = np.random.SeedSequence(int(rng.integers(2**31))).spawn(2)
    c_a = phi_bound_constant(dom, basis, 1000, np.random.default_rng(seeds[0]), ascent=False)
    c_b = phi_bound_constant(dom, basis, 1000, np.random.default_rng(seeds[1]), ascent=False)
    C = phi_bound_constant(dom, basis, 1000, np.random.default_rng(seeds[0]))
    worst = 0.0
    for _ in range(trials):
        u = random_function(basis, rng, norm=rng.uniform(0.1, 10.0))
        worst = max(worst, solve_phi(dom, u).pairing / (C**2 * dom.h1_inner(u, u) ** 2))
    stable = _rel(c_a, c_b) <= 0.10
    passed = min_phi >= 0 and hom <= 1e-12 and weak <= 1e-10 and worst <= 1 + 1e-12 and stable
    return CheckReport(
        "potential_properties", passed,
        {"min_phi": min_phi, "homogeneity_rel_err": hom, "weak_form_rel_err": weak,
         "C": C, "C_seed_a": c_a, "C_seed_b": c_b, "worst_pairing_over_C2u4": worst},
        1e-10, "phi >= 0, phi_{tu} = t^2 phi_u, pairing = Dirichlet energy, pairing <= C^2 |u|^4",
    )


def _fd_gradient_error(problem, basis, rng, pairs, delta=FD_STEP):
    dom = problem.domain
    worst = 0.0
    for _ in range(pairs):
        u = random_function(basis, rng)
        v = random_function(basis, rng)
        st = State(problem, u)
        exact = dom.h1_inner(st.gradient.g, v)
        fd = (State(problem, u + delta * v).energy - State(problem, u - delta * v).energy) / (2 * delta)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-12))
    return worst


def check_gradient(problem, basis, rng, pairs=50):
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        for b in (0.0, 1.0):
            for p in (4.5, 5.0, 5.5):
                spec = NonlinearitySpec(p=p, alpha_plus=problem.nonlinearity.alpha_plus,
                                        alpha_minus=problem.nonlinearity.alpha_minus,
                                        kappa=problem.nonlinearity.kappa)
                worst = max(worst, _fd_gradient_error(Problem(problem.domain, spec, a, b), basis, rng, pairs))
    return CheckReport("gradient_consistency", worst <= 1e-6, {"max_rel_err": worst}, 1e-6,
                       "central differences of J against <g, v> over a x b x p grid")


def check_auxiliary(problem, basis, rng, trials=200):
    a = problem.a
    bound = norm_bound_constant(problem, basis, rng=rng)
    worst_pair, worst_norm, worst_conv, statement = np.inf, 0.0, 0.0, np.inf
    for _ in range(trials):
        u = random_function(basis, rng, norm=rng.uniform(0.1, 5.0))
        st = State(problem, u)
        aux = apply_A(problem, u, st)
        g = st.gradient.norm
        worst_pair = min(worst_pair, aux.pairing - a * aux.residual**2)
        statement = min(statement, aux.pairing - aux.residual**2)
        worst_norm = max(worst_norm, g / ((a + bound.C * st.norm_sq) * aux.residual))
        worst_conv = max(worst_conv, aux.residual * a / g)
    odd_err = 0.0
    if problem.nonlinearity.is_odd:
        u = random_function(basis, rng)
        odd_err = float(np.max(np.abs(apply_A(problem, -u).v + apply_A(problem, u).v)))
    passed = (worst_pair >= -1e-10 and worst_norm <= 1 + 1e-6 and worst_conv <= 1 + 1e-9
              and odd_err <= 1e-12)
    measured = {"min_pairing_gap": worst_pair, "max_norm_ratio": worst_norm,
                "max_residual_ratio": worst_conv, "C": bound.C, "odd_err": odd_err}
    if a >= 1:
        measured["min_statement_gap"] = statement
    return CheckReport(
        "auxiliary_operator", passed, measured, 1e-10,
        "<J'(u), u - Au> >= a |u - Au|^2, |J'(u)| <= (a + C|u|^2)|u - Au|, |u - Au| <= |J'(u)|/a",
    )


def check_ar_gap(problem, basis, rng, trials=500):
    worst = np.inf
    for _ in range(trials):
        u = random_function(basis, rng, norm=rng.uniform(0.05, 20.0))
        g = ar_gap(problem, u)
        worst = min(worst, g.gap - g.lower_bound)
    return CheckReport("ar_gap", worst >= -1e-10, {"min_gap_minus_bound": worst}, 1e-10,
                       "J(u) - <J'(u),u>/mu >= a(1/2-1/mu)|u|^2 + b(1/4-1/mu)|u|^4")


def check_contraction(problem, basis, rng, geometry):
    rep = cone_contraction_check(problem, geometry, basis, 200, rng)
    return CheckReport("cone_contraction", rep.passed,
                       {"mu": rep.mu, "failures": rep.failures, "trials": rep.trials,
                        "worst_ratio": rep.worst_ratio, "largest_mu": rep.largest_mu},
                       0.5, "dist(A u) <= dist(u) / 2 whenever dist(u) < mu")


def check_radius(problem, basis, rng, geometry, delta_m, m):
    ok = 0 < geometry.mu < min(delta_m, 1.0 / m)
    return CheckReport("cone_radius_vs_delta", ok,
                       {"mu": geometry.mu, "delta_m": delta_m, "inv_m": 1.0 / m}, 0.0,
                       "0 < mu < min(delta_m, 1/m)")


def check_mountain_pass(problem, basis, rng, samples=1000):
    ends = build_endpoints(problem, basis, rng=rng)
    lowest = np.inf
    for _ in range(samples):
        u = random_function(basis, rng, norm=ends.r)
        lowest = min(lowest, State(problem, u).energy)
    e_ok = (State(problem, ends.e_plus).energy < 0 and State(problem, ends.e_minus).energy < 0
            and ends.t_plus > ends.r and ends.t_minus > ends.r)
    passed = lowest >= ends.c_star * 0.95 and e_ok
    return CheckReport("mountain_pass_sphere", passed,
                       {"r": ends.r, "c_star": ends.c_star, "c2": ends.c2, "min_J_on_sphere": lowest,
                        "endpoint_scale_plus": ends.t_plus, "endpoint_scale_minus": ends.t_minus},
                       0.05, "inf J on |u| = r >= c_* (5% slack) and J(e+-) < 0 beyond r")


def _double_tube_sample(dom, basis, rng, mu, on_boundary):
    while True:
        g = random_function(basis, rng)
        up, un = positive_part(g), negative_part(g)
        if dom.h1_norm(up) > 0 and dom.h1_norm(un) > 0:
            break
    if on_boundary:
        sp, sn = mu, mu
    else:
        sp, sn = mu * rng.uniform(0.01, 0.999), mu * rng.uniform(0.01, 0.999)
    return up * (sp / dom.h1_norm(up)) + un * (sn / dom.h1_norm(un))


def check_double_tube(problem, basis, rng, geometry, samples=500):
    dom, p = problem.domain, problem.nonlinearity.p
    kap = {q: sobolev_constant(dom, q, basis) for q in (2.0, p)}
    worst = 0.0
    for _ in range(samples):
        u = _double_tube_sample(dom, basis, rng, geometry.mu, on_boundary=False)
        for q, k in kap.items():
            worst = max(worst, dom.lp_norm(u, q) / (2 * k * geometry.mu))
    return CheckReport("double_tube_embedding", worst < 1.0,
                       {"kappa_2": kap[2.0], "kappa_p": kap[p], "max_ratio": worst}, 0.0,
                       "|u|_q <= 2 kappa_q mu on both tubes, q in {2, p}")


def check_double_boundary(problem, basis, rng, geometry, samples=500):
    dom = problem.domain
    floor = problem.a * geometry.mu**2 / 8
    lowest = np.inf
    for _ in range(samples):
        u = _double_tube_sample(dom, basis, rng, geometry.mu, on_boundary=True)
        lowest = min(lowest, State(problem, u).energy)
    return CheckReport("double_boundary_energy", lowest >= floor,
                       {"min_J": lowest, "floor": floor, "mu": geometry.mu}, 0.0,
                       "J(u) >= a mu^2 / 8 where both surrogate distances equal mu")


def check_intersection(problem, basis, rng, geometry, K=33):
    choice = choose_R(problem, basis, geometry, rng=rng)
    e2 = second_mode(basis)
    smap = linear_map(K, choice.R, negative_part(e2), positive_part(e2))
    hit = intersection_check(smap, geometry)
    tiny = 0.25 * geometry.mu * e2
    control = intersection_check(constant_map(K, tiny), geometry)
    return CheckReport("simplex_intersection", hit and not control,
                       {"R": choice.R, "delta": choice.delta, "kappa2": choice.kappa2,
                        "outer_edge_max_J": choice.boundary_max_energy,
                        "initial_map": hit, "constant_control": control}, 0.0,
                       "initial simplex map meets both cone boundaries; a constant map in both tubes does not")


def run_all(problem, basis=None, seed=42, m=32):
    """Run every check in :data:`CHECK_NAMES` order and return the reports."""
    if basis is None:
        basis = eigenbasis(problem.domain, 64)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(CHECK_NAMES))]
    rng = dict(zip(CHECK_NAMES, streams))
    geometry, _, delta_m = default_geometry(problem, basis, m, rng=np.random.default_rng(seed))
    return [
        check_hypotheses(problem, basis, rng["hypotheses"]),
        check_poisson_closed_form(problem, basis, rng["poisson_closed_form"]),
        check_potential(problem, basis, rng["potential_properties"]),
        check_gradient(problem, basis, rng["gradient_consistency"]),
        check_auxiliary(problem, basis, rng["auxiliary_operator"]),
        check_ar_gap(problem, basis, rng["ar_gap"]),
        check_contraction(problem, basis, rng["cone_contraction"], geometry),
        check_radius(problem, basis, rng["cone_radius_vs_delta"], geometry, delta_m, m),
        check_mountain_pass(problem, basis, rng["mountain_pass_sphere"]),
        check_double_tube(problem, basis, rng["double_tube_embedding"], geometry),
        check_double_boundary(problem, basis, rng["double_boundary_energy"], geometry),
        check_intersection(problem, basis, rng["simplex_intersection"], geometry),
    ]


def format_text(reports):
    lines = []
    for r in reports:
        nums = ", ".join(f"{k}={_fmt(v)}" for k, v in r.measured.items())
        lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.details}")
        lines.append(f"       {nums}")
    n_pass = sum(r.passed for r in reports)
    lines.append(f"{n_pass}/{len(reports)} checks passed")
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def to_json(reports):
    return json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True)
