"""The nonlocal potential: ``-Laplace(phi) = u^2`` with zero boundary values."""

from dataclasses import dataclass

import numpy as np

from .domain import random_function


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    phi: np.ndarray
    pairing: float
    dirichlet_energy: float


def solve_phi(domain, u):
    """Potential of ``u`` with the nodal source ``u**2``.

    ``L`` is an M-matrix, so ``phi >= 0`` holds node by node.
    """
    u = domain.check(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite values in u")
    src = u * u
    phi = domain.solve(src)
    w = domain.weight
    pairing = w * float(phi @ src)
    energy = w * float(phi @ (domain.stiffness @ phi))
    return PoissonSolution(phi, pairing, energy)


def closed_form_phi_sine(x):
    """Exact potential for ``u = sqrt(2) sin(pi x)`` on (0, 1)."""
    x = np.asarray(x, dtype=float)
    return (1.0 - np.cos(2 * np.pi * x)) / (4 * np.pi**2) + x * (1.0 - x) / 2.0


def potential_multiplier(domain, phi, iters=500, rtol=1e-13):
    """``max_v int phi v^2 / |v|^2``: the top eigenvalue of ``L^-1 diag(phi)``."""
    v = np.sqrt(np.maximum(phi, 0.0)) + 1e-300
    val = 0.0
    for _ in range(iters):
        v = domain.solve(phi * v)
        nrm = np.sqrt(float(v @ (domain.stiffness @ v)))
        if nrm == 0.0:
            return 0.0
        v /= nrm
        new = float(v @ (phi * v))
        if abs(new - val) <= rtol * new:
            return new
        val = new
    return val


def multiplier_ratio(domain, u):
    """``theta(phi_u) / |u|^2`` with ``theta`` from :func:`potential_multiplier`."""
    return potential_multiplier(domain, solve_phi(domain, u).phi) / domain.h1_inner(u, u)


def coupling_sup(domain, basis=None, sweeps=30):
    """Estimate ``sup int phi_u v^2 / (|u|^2 |v|^2)`` by alternating maximisation.

    The form ``B(u, v) = int phi_u v^2 = int phi_v u^2`` is symmetric, so
    maximising over ``v`` for fixed ``u`` then swapping roles never
    decreases it.  The start is the principal mode.  Since
    ``|phi_u|^2 = B(u, u)``, the square root bounds ``|phi_u| / |u|^2`` too.
    """
    if basis is not None:
        u = basis.vectors[:, 0]
    else:
        u = np.prod(np.sin(np.pi * domain.coords), axis=1)
    best = multiplier_ratio(domain, u)
    for _ in range(sweeps):
        phi = solve_phi(domain, u).phi
        v = np.sqrt(np.maximum(phi, 0.0))
        for _ in range(200):
            v = domain.solve(phi * v)
            v /= domain.h1_norm(v)
        new = multiplier_ratio(domain, v)
        u = v
        if new <= best * (1 + 1e-12):
            return max(best, new)
        best = new
    return best


def phi_bound_constant(domain, basis, trials=1000, rng=None, return_samples=False,
                       ascent=True):
    """Constant ``C`` in ``|phi_u| <= C |u|^2``.

    The largest ratio over ``trials`` random functions; with ``ascent`` the
    estimate from :func:`coupling_sup` is folded in, which makes the
    constant hold for fresh samples rather than only the ones drawn.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    rng = np.random.default_rng(0) if rng is None else rng
    ratios = np.empty(trials)
    for i in range(trials):
        u = random_function(basis, rng)
        sol = solve_phi(domain, u)
        ratios[i] = np.sqrt(sol.dirichlet_energy) / domain.h1_inner(u, u)
    C = float(ratios.max())
    if ascent:
        C = max(C, float(np.sqrt(coupling_sup(domain, basis))))
    if return_samples:
        return C, ratios
    return C


@dataclass(frozen=True)
class ContinuityReport:
    sizes: tuple
    errors: tuple
    orders: tuple

    @property
    def min_order(self):
        return min(self.orders) if self.orders else float("inf")


def continuity_check(domain, u, sizes, direction=None, rng=None):
    """Pairing error ``|P(u + s z) - P(u)|`` along shrinking perturbations.

    ``orders`` are the observed log2 rates between consecutive sizes; for a
    smooth quartic map they approach 1 (or better).
    """
    u = domain.check(u)
    if direction is None:
        rng = np.random.default_rng(0) if rng is None else rng
        direction = rng.standard_normal(domain.size)
    z = direction / domain.h1_norm(direction) * max(domain.h1_norm(u), 1.0)
    base = solve_phi(domain, u).pairing
    sizes = tuple(float(s) for s in sizes)
    errors = tuple(abs(solve_phi(domain, u + s * z).pairing - base) for s in sizes)
    orders = []
    for (s0, e0), (s1, e1) in zip(zip(sizes, errors), zip(sizes[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            orders.append(np.log(e0 / e1) / np.log(s0 / s1))
    return ContinuityReport(sizes, errors, tuple(orders))
