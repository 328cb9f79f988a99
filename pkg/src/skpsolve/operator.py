"""The linearised-solve operator ``A`` and the sign-cone geometry.

``A(u)`` is the minimiser of the strictly convex quadratic

    I_u(v) = 1/2 (a + b|u|^2) |v|^2 + 1/2 int phi_u v^2 - int v f(x, u),

i.e. the solution of ``((a + b|u|^2) L + diag(phi_u)) v = f(u)``.  Its
fixed points are exactly the critical points of ``J``, and ``u - A(u)`` is
a descent direction with ``<J'(u), u - A(u)> >= a |u - A(u)|^2``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .domain import random_function
from .energy import State
from .exceptions import CalibrationError
from .poisson import coupling_sup, multiplier_ratio


@dataclass(frozen=True, eq=False)
class AuxResult:
    v: np.ndarray
    residual: float
    pairing: float
    direction: np.ndarray  # u - A(u)


def apply_A(problem, u, state=None):
    st = state if state is not None else State(problem, u)
    dom = problem.domain
    # solve for the correction directly: forming u - v from two large
    # nearly equal vectors would cancel most significant digits
    d = dom.solve_shifted(st.kirchhoff, st.phi, st.excess)
    v = st.u - d
    residual = dom.h1_norm(d)
    pairing = st.derivative(d)
    return AuxResult(v, residual, pairing, d)


def positive_part(u):
    return np.maximum(u, 0.0)


def negative_part(u):
    return np.minimum(u, 0.0)


@dataclass(frozen=True, eq=False)
class ConeGeometry:
    """Surrogate distances to the cones of nonnegative / nonpositive functions.

    ``dist_plus(u) = |u^-|`` bounds the distance to ``+P`` from above since
    ``u^+`` lies in ``+P``; symmetrically for ``dist_minus``.
    """

    domain: object
    mu: float

    def dist_plus(self, u):
        return self.domain.h1_norm(negative_part(u))

    def dist_minus(self, u):
        return self.domain.h1_norm(positive_part(u))

    def dist(self, u, sign):
        return self.dist_plus(u) if sign > 0 else self.dist_minus(u)

    def in_tube(self, u, sign):
        """Membership in ``+D0`` (sign > 0) or ``-D0`` (sign < 0)."""
        return self.dist(u, sign) < self.mu

    def in_both_tubes(self, u):
        return self.dist_plus(u) < self.mu and self.dist_minus(u) < self.mu

    def in_S(self, u):
        return self.dist_plus(u) >= self.mu and self.dist_minus(u) >= self.mu

    def with_mu(self, mu):
        return ConeGeometry(self.domain, float(mu))


@dataclass(frozen=True)
class ContractionReport:
    mu: float
    trials: int
    failures: int
    worst_ratio: float
    largest_mu: float

    @property
    def passed(self):
        return self.failures == 0


def contaminated_sample(problem, basis, rng, sign, target, bulk_norm):
    """``u`` in the ``sign`` cone plus opposite-sign mass at surrogate distance ``target``."""
    dom = problem.domain
    g = random_function(basis, rng)
    bulk = positive_part(sign * g)
    stain = negative_part(sign * g)
    while dom.h1_norm(stain) == 0.0 or dom.h1_norm(bulk) == 0.0:
        g = random_function(basis, rng)
        bulk, stain = positive_part(sign * g), negative_part(sign * g)
    u = bulk * (bulk_norm / dom.h1_norm(bulk)) + stain * (target / dom.h1_norm(stain))
    return sign * u


def _contraction_ratios(problem, geometry, basis, rng, trials, mu, bulk_norms):
    ratios = np.empty(trials)
    for i in range(trials):
        sign = 1 if i % 2 == 0 else -1
        target = mu * rng.uniform(0.05, 0.999)
        bulk = bulk_norms[i % len(bulk_norms)]
        u = contaminated_sample(problem, basis, rng, sign, target, bulk)
        d0 = geometry.dist(u, sign)
        d1 = geometry.dist(apply_A(problem, u).v, sign)
        ratios[i] = d1 / d0
    return ratios


def cone_contraction_check(problem, geometry, basis, trials=200, rng=None,
                           bulk_norms=(0.5, 1.0, 2.0, 4.0), max_halvings=40):
    """Check ``dist(A u) <= dist(u) / 2`` for samples with ``dist(u) < mu``.

    Raises :class:`CalibrationError` (with a suggested smaller radius) when
    the configured ``geometry.mu`` fails; ``largest_mu`` is the largest
    radius among ``mu, 2 mu, 4 mu, ...`` (up to 1) that still passes.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    mu = geometry.mu
    ratios = _contraction_ratios(problem, geometry, basis, rng, trials, mu, bulk_norms)
    failures = int(np.sum(ratios > 0.5))
    if failures:
        suggestion = mu
        for _ in range(max_halvings):
            suggestion /= 2
            r = _contraction_ratios(problem, geometry, basis, rng, trials, suggestion, bulk_norms)
            if np.all(r <= 0.5):
                break
        raise CalibrationError(
            f"cone contraction fails at mu={mu:.3g} ({failures}/{trials} samples)",
            suggested_mu=suggestion,
        )
    largest = mu
    while largest * 2 <= 1.0:
        r = _contraction_ratios(problem, geometry, basis, rng, max(trials // 4, 1),
                                largest * 2, bulk_norms)
        if np.any(r > 0.5):
            break
        largest *= 2
    return ContractionReport(mu, trials, failures, float(ratios.max()), largest)


def calibrate_mu(problem, geometry, basis, trials=200, rng=None):
    """Shrink ``geometry.mu`` until the contraction check passes."""
    rng = np.random.default_rng(0) if rng is None else rng
    while True:
        try:
            report = cone_contraction_check(problem, geometry, basis, trials, rng)
            return geometry, report
        except CalibrationError as err:
            geometry = geometry.with_mu(err.suggested_mu)


def _cone_distance(dom, u):
    return min(dom.h1_norm(positive_part(u)), dom.h1_norm(negative_part(u)))


def estimate_delta_m(basis, m, k, samples=10_000, radius=1.0, rng=None, polish=3,
                     chunk=1000):
    """Smallest surrogate distance from the sphere ``|u| = radius`` in blocks k..m to ``+-P``.

    Monte-Carlo over the sphere followed by a local descent (Nelder-Mead on
    the mode coefficients) from the ``polish`` best samples.
    """
    if not 2 <= k <= m:
        raise ValueError(f"need 2 <= k <= m, got k={k}, m={m}")
    rng = np.random.default_rng(0) if rng is None else rng
    dom = basis.domain
    idx = basis.block_indices(k, m)
    E = basis.vectors[:, idx]
    C = rng.standard_normal((samples, len(idx)))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    w, L = dom.weight, dom.stiffness
    dist = np.empty(samples)
    for lo in range(0, samples, chunk):
        U = (C[lo:lo + chunk] @ E.T) * radius
        P, N = np.maximum(U, 0.0), np.minimum(U, 0.0)
        dp = np.sqrt(w * np.einsum("ij,ij->i", P, (L @ P.T).T))
        dn = np.sqrt(w * np.einsum("ij,ij->i", N, (L @ N.T).T))
        dist[lo:lo + chunk] = np.minimum(dp, dn)
    best = float(dist.min())

    def objective(c):
        c = c / np.linalg.norm(c)
        return _cone_distance(dom, radius * (E @ c))

    for i in np.argsort(dist)[:polish]:
        res = minimize(objective, C[i], method="Nelder-Mead",
                       options={"maxiter": 200 * len(idx), "xatol": 1e-8, "fatol": 1e-12})
        best = min(best, float(res.fun))
    if not best > 0:
        raise AssertionError("cone distance estimate must be positive")
    return best


def default_geometry(problem, basis, m, radius=1.0, samples=10_000, rng=None, trials=200):
    """Cone radius ``min(delta_m, 1/m) / 2``, shrunk until the contraction check passes.

    ``radius`` is the sphere on which ``delta_m`` is measured.  Returns the
    calibrated geometry, the contraction report and ``delta_m``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    m = min(m, basis.n_blocks)
    delta = estimate_delta_m(basis, m, 2, samples=samples, radius=radius, rng=rng)
    geometry = ConeGeometry(problem.domain, 0.5 * min(delta, 1.0 / m))
    geometry, report = calibrate_mu(problem, geometry, basis, trials, rng)
    return geometry, report, delta


@dataclass(frozen=True)
class NormBound:
    """``|J'(u)| <= (a + C |u|^2) |u - A(u)|`` with ``C = b + multiplier``."""

    C: float
    multiplier: float
    sampled: float
    ascent: float


def norm_bound_constant(problem, basis, trials=200, rng=None, sweeps=30):
    """Constant of the gradient bound in terms of the fixed-point residual.

    ``J'(u) = M (u - A(u))`` with ``M = (a + b|u|^2) L + diag(phi_u)``, so the
    operator norm of ``M`` in H^1_0 bounds the ratio.  The potential part is
    ``sup_u theta(phi_u) / |u|^2`` with ``theta`` the top eigenvalue from
    :func:`potential_multiplier`; it is estimated on random samples and by
    alternating maximisation of the symmetric form ``int phi_u v^2``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    dom = problem.domain
    sampled = max(multiplier_ratio(dom, random_function(basis, rng)) for _ in range(trials))
    ascent = coupling_sup(dom, basis, sweeps)
    mult = max(sampled, ascent)
    return NormBound(problem.b + mult, mult, sampled, ascent)
