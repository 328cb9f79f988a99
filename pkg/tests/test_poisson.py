import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from skpsolve import build_domain, eigenbasis, random_function, solve_phi
from skpsolve.poisson import (closed_form_phi_sine, continuity_check, coupling_sup,
                              phi_bound_constant, potential_multiplier)

SQUARE = build_domain(2, 15)


def test_closed_form_solves_the_ode():
    x = sp.symbols("x")
    phi = (1 - sp.cos(2 * sp.pi * x)) / (4 * sp.pi**2) + x * (1 - x) / 2
    assert sp.simplify(-sp.diff(phi, x, 2) - 2 * sp.sin(sp.pi * x) ** 2) == 0
    assert phi.subs(x, 0) == 0 and sp.simplify(phi.subs(x, 1)) == 0
    xs = np.linspace(0, 1, 11)
    assert np.allclose(sp.lambdify(x, phi)(xs), closed_form_phi_sine(xs), atol=1e-15)


@pytest.mark.parametrize("n,tol", [(255, 5e-6), (1023, 1e-6)])
def test_potential_of_sine(n, tol):
    dom = build_domain(1, n)
    x = dom.coords[:, 0]
    phi = solve_phi(dom, np.sqrt(2) * np.sin(np.pi * x)).phi
    assert np.max(np.abs(phi - closed_form_phi_sine(x))) <= tol


def test_potential_error_is_second_order():
    errs = []
    for n in (127, 255, 511):
        dom = build_domain(1, n)
        x = dom.coords[:, 0]
        errs.append(np.max(np.abs(solve_phi(dom, np.sqrt(2) * np.sin(np.pi * x)).phi
                                  - closed_form_phi_sine(x))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


@pytest.mark.parametrize("basis", [eigenbasis(build_domain(1, 255), 32), eigenbasis(SQUARE, 20)],
                         ids=["1d", "2d"])
def test_potential_nonnegative(basis, rng):
    for _ in range(50):
        assert solve_phi(basis.domain, random_function(basis, rng)).phi.min() >= 0


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.01, 100), seed=st.integers(0, 2**31 - 1))
def test_quadratic_homogeneity(t, seed, basis255):
    dom = basis255.domain
    u = random_function(basis255, np.random.default_rng(seed))
    phi, scaled = solve_phi(dom, u).phi, solve_phi(dom, t * u).phi
    assert np.max(np.abs(scaled - t * t * phi)) <= 1e-12 * np.max(t * t * phi)


def test_pairing_equals_dirichlet_energy(basis255, rng):
    for _ in range(20):
        sol = solve_phi(basis255.domain, random_function(basis255, rng))
        assert sol.pairing == pytest.approx(sol.dirichlet_energy, rel=1e-10)


def test_bound_constant_seed_stable(basis255):
    c = [phi_bound_constant(basis255.domain, basis255, 1000, np.random.default_rng(s), ascent=False)
         for s in (1, 2)]
    assert abs(c[0] - c[1]) <= 0.1 * max(c)
    with pytest.raises(ValueError):
        phi_bound_constant(basis255.domain, basis255, 10)


def test_bound_constant_dominates_samples(basis255, rng):
    dom = basis255.domain
    C = phi_bound_constant(dom, basis255, 200, rng)
    for _ in range(200):
        u = random_function(basis255, rng, norm=rng.uniform(0.1, 10))
        assert solve_phi(dom, u).pairing <= C**2 * dom.h1_inner(u, u) ** 2


def test_potential_multiplier_matches_dense_eigenvalue(dom255, basis255, rng):
    phi = solve_phi(dom255, random_function(basis255, rng)).phi
    dense = np.linalg.eigvals(np.linalg.solve(dom255.stiffness.toarray(), np.diag(phi)))
    assert potential_multiplier(dom255, phi) / dom255.weight == pytest.approx(
        np.max(dense.real) / dom255.weight, rel=1e-8)


def test_coupling_sup_at_least_principal_mode(dom255, basis255):
    e1 = basis255.vectors[:, 0]
    phi = solve_phi(dom255, e1).phi
    assert coupling_sup(dom255, basis255) >= potential_multiplier(dom255, phi) * (1 - 1e-12)


def test_pairing_continuity(dom255, basis255, rng):
    rep = continuity_check(dom255, random_function(basis255, rng), [1e-1, 1e-2, 1e-3, 1e-4])
    assert rep.min_order > 0.9


def test_rejects_non_finite(dom255):
    u = np.zeros(dom255.size)
    u[3] = np.nan
    with pytest.raises(ValueError):
        solve_phi(dom255, u)
