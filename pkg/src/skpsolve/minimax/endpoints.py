"""Mountain-pass endpoints, the simplex map and its intersection test.

``build_endpoints`` certifies the geometry of a signed mountain pass: a
sphere ``|u| = r`` on which ``J >= c_* > 0`` and endpoints ``e^+- = +-t e_1``
beyond it with negative energy.  ``choose_R`` does the same for the
two-parameter family ``R (s e_2^- + t e_2^+)`` over the triangle
``{s, t >= 0, s + t <= 1}``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..domain import random_function, sobolev_constant
from ..energy import State
from ..exceptions import ParameterError
from ..operator import negative_part, positive_part


def batch_energy(problem, U):
    """Energies of the rows of ``U`` (one grid function per row)."""
    dom = problem.domain
    U = np.atleast_2d(np.asarray(U, dtype=float))
    w = dom.weight
    LU = (dom.stiffness @ U.T).T
    ns = w * np.einsum("ij,ij->i", U, LU)
    sq = U * U
    phi = dom.solve(sq.T).T
    pairing = w * np.einsum("ij,ij->i", phi, sq)
    potential = w * problem.F(U).sum(axis=1)
    return 0.5 * problem.a * ns + 0.25 * problem.b * ns * ns + 0.25 * pairing - potential


def kappa_max(problem):
    return float(np.max(problem.kappa))


# -- signed mountain pass ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class Endpoints:
    e_plus: np.ndarray
    e_minus: np.ndarray
    r: float
    c_star: float
    c2: float
    beta: float
    t_plus: float
    t_minus: float


def measure_c2(problem, basis, samples=1000, rng=None):
    """``c_2`` in ``J(u) >= a/4 |u|^2 - (c_2/p) |u|^p``, with the embedding constant.

    With ``F(x,t) <= c_1 |t|^p / p`` and ``c_1 = alpha_max sup kappa``, one
    may take ``c_2 = c_1 beta^p`` where ``beta = sup |u|_p / |u|``.  ``beta`` is
    the larger of an ascent estimate and the best of ``samples`` random draws.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    dom, p = problem.domain, problem.nonlinearity.p
    beta = sobolev_constant(dom, p, basis)
    for _ in range(samples):
        u = random_function(basis, rng)
        beta = max(beta, dom.lp_norm(u, p))
    c1 = problem.nonlinearity.alpha_max * kappa_max(problem)
    return c1 * beta**p, beta


def build_endpoints(problem, basis, samples=1000, rng=None, max_doublings=80):
    """Radius ``r``, level ``c_*`` and endpoints ``e^+-`` with ``J(e^+-) < 0``, ``|e^+-| > r``."""
    p, a = problem.nonlinearity.p, problem.a
    c2, beta = measure_c2(problem, basis, samples, rng)
    r = (a / (2.0 * c2)) ** (1.0 / (p - 2.0))
    c_star = (0.5 - 1.0 / p) * (a / 2.0) ** (p / (p - 2.0)) * c2 ** (-2.0 / (p - 2.0))
    e1 = basis.vectors[:, 0]
    ts = []
    for sign in (1.0, -1.0):
        t = 1.0
        for _ in range(max_doublings):
            if t > r and State(problem, sign * t * e1).energy < 0:
                break
            t *= 2.0
        else:
            raise ParameterError(
                f"no endpoint with negative energy along {'+' if sign > 0 else '-'}e_1 "
                f"below t = {t:.3g}; the superlinear growth is not visible numerically"
            )
        ts.append(t)
    return Endpoints(ts[0] * e1, -ts[1] * e1, r, c_star, c2, beta, ts[0], ts[1])


# -- simplex maps -----------------------------------------------------------

def simplex_lattice(K):
    """Nodes ``(s, t) = (i, j)/(K-1)`` with ``i + j <= K-1`` and the triangles between them."""
    if K < 2:
        raise ValueError("need K >= 2")
    index = {}
    nodes = []
    for i in range(K):
        for j in range(K - i):
            index[i, j] = len(nodes)
            nodes.append((i / (K - 1), j / (K - 1)))
    tris = []
    for i in range(K - 1):
        for j in range(K - 1 - i):
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j <= K - 3:
                tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    return np.array(nodes), np.array(tris, dtype=int)


@dataclass(frozen=True, eq=False)
class SimplexMap:
    """Grid functions attached to the nodes of a triangulated simplex.

    ``nodes[:, 0]`` is the ``s`` coordinate (edge ``s = 0`` is the first
    boundary piece), ``nodes[:, 1]`` the ``t`` coordinate; ``images`` has one
    row per node.
    """

    K: int
    nodes: np.ndarray
    triangles: np.ndarray
    images: np.ndarray

    @property
    def outer_edge(self):
        """Indices of the nodes with ``s + t = 1``."""
        return np.flatnonzero(np.isclose(self.nodes.sum(axis=1), 1.0))

    @property
    def edge_s0(self):
        return np.flatnonzero(self.nodes[:, 0] == 0.0)

    @property
    def edge_t0(self):
        return np.flatnonzero(self.nodes[:, 1] == 0.0)

    def distances(self, geometry):
        d_plus = np.array([geometry.dist_plus(u) for u in self.images])
        d_minus = np.array([geometry.dist_minus(u) for u in self.images])
        return d_plus, d_minus

    def energies(self, problem):
        return batch_energy(problem, self.images)


def linear_map(K, R, minus_shape, plus_shape):
    """``(s, t) -> R (s minus_shape + t plus_shape)`` on a ``K``-point-per-edge lattice."""
    nodes, tris = simplex_lattice(K)
    images = R * (np.outer(nodes[:, 0], minus_shape) + np.outer(nodes[:, 1], plus_shape))
    return SimplexMap(K, nodes, tris, images)


def constant_map(K, u):
    nodes, tris = simplex_lattice(K)
    return SimplexMap(K, nodes, tris, np.tile(np.asarray(u, dtype=float), (len(nodes), 1)))


def intersection_check(smap, geometry):
    """Does the image meet ``boundary(D0) and boundary(-D0)`` simultaneously?

    On every triangle the functions ``dist_plus - mu`` and ``dist_minus - mu``
    are interpolated linearly; the check succeeds when their zero lines
    cross inside (or on the border of) some triangle.
    """
    d_plus, d_minus = smap.distances(geometry)
    g1, g2 = d_plus - geometry.mu, d_minus - geometry.mu
    for tri in smap.triangles:
        a, b = g1[tri], g2[tri]
        if a.min() > 0 or a.max() < 0 or b.min() > 0 or b.max() < 0:
            continue
        M = np.vstack([a, b, np.ones(3)])
        try:
            lam = np.linalg.solve(M, [0.0, 0.0, 1.0])
        except np.linalg.LinAlgError:
            # degenerate cell with parallel zero lines: both functions
            # change sign here, which is all the coarse test can resolve
            return True
        if np.all(lam >= -1e-12):
            return True
    return False


# -- choosing R -------------------------------------------------------------

@dataclass(frozen=True)
class RChoice:
    R: float
    delta: float
    kappa2: float
    boundary_max_energy: float
    boundary_min_l2: float
    doublings: int


def second_mode(basis):
    if basis.n_blocks < 2:
        raise ParameterError("the basis must contain at least two eigenspaces")
    return basis.vectors[:, basis.block_indices(2, 2)[0]]


def l2_delta(domain, minus_shape, plus_shape):
    """``min_t |(1 - t) minus_shape + t plus_shape|_2`` over ``t in [0, 1]``."""
    res = minimize_scalar(
        lambda t: domain.lp_norm((1 - t) * minus_shape + t * plus_shape, 2),
        bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12},
    )
    ends = [domain.lp_norm(minus_shape, 2), domain.lp_norm(plus_shape, 2)]
    return float(min(res.fun, *ends))


def measure_kappa(domain, basis, q=2.0, samples=200, rng=None):
    """Largest observed ``|u^+-|_q / |u^+-|`` over random sign-changing ``u``."""
    rng = np.random.default_rng(0) if rng is None else rng
    best = 0.0
    for _ in range(samples):
        u = random_function(basis, rng)
        for part in (positive_part(u), negative_part(u)):
            n = domain.h1_norm(part)
            if n > 0:
                best = max(best, domain.lp_norm(part, q) / n)
    return best


def choose_R(problem, basis, geometry, samples=64, rng=None, max_doublings=80,
             shapes=None):
    """Smallest ``R = 2^j`` making the outer edge of the simplex map admissible.

    Requires ``J < 0`` on ``samples`` outer-edge points, ``|phi_0|_2 >= delta R``
    there, and ``delta R > 2 kappa_2 mu`` so the outer edge cannot enter
    ``D0 and -D0`` (whose members satisfy ``|u|_2 < 2 kappa_2 mu``).
    """
    dom = problem.domain
    if shapes is None:
        e2 = second_mode(basis)
        shapes = (negative_part(e2), positive_part(e2))
    minus_shape, plus_shape = shapes
    delta = l2_delta(dom, minus_shape, plus_shape)
    if not delta > 0:
        raise ParameterError("the second mode must have nonzero positive and negative parts")
    # the Poincare constant is the exact supremum; sampling only refines it
    kappa2 = max(measure_kappa(dom, basis, 2.0, rng=rng), sobolev_constant(dom, 2.0, basis))
    t = np.linspace(0.0, 1.0, samples)
    edge = np.outer(1 - t, minus_shape) + np.outer(t, plus_shape)
    l2 = np.array([dom.lp_norm(u, 2) for u in edge])
    R = 1.0
    for j in range(max_doublings):
        energies = batch_energy(problem, R * edge)
        if (energies.max() < 0 and (R * l2).min() >= delta * R * (1 - 1e-12)
                and delta * R > 2 * kappa2 * geometry.mu):
            return RChoice(R, delta, kappa2, float(energies.max()), float(R * l2.min()), j)
        R *= 2.0
    raise ParameterError(f"no admissible simplex scale below R = {R:.3g}")
