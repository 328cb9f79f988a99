"""Finite-difference Dirichlet domains and the Laplacian eigenbasis.

Grid functions are flat float arrays over the interior nodes (row-major in
2D).  The stiffness matrix ``L`` is the centred second-difference Laplacian
with the boundary rows eliminated, so ``L`` is an SPD M-matrix and

    <u, v>_{H^1_0} = w * u @ (L @ v),        w = h**dim,

is the discrete Dirichlet inner product.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_solve_banded, cholesky_banded, eigh_tridiagonal, solveh_banded
from scipy.sparse.linalg import eigsh, factorized, spsolve

from .exceptions import ConfigurationError

GROUP_RTOL = 1e-8


@dataclass(frozen=True, eq=False, repr=False)
class DiscreteDomain:
    """Uniform grid on (0, 1)^dim with homogeneous Dirichlet data."""

    dim: int
    n: int
    h: float
    coords: np.ndarray
    stiffness: sp.csr_matrix
    _poisson: object = field(default=None, compare=False)

    def __repr__(self):
        return f"DiscreteDomain(dim={self.dim}, n={self.n}, h={self.h:.6g})"

    @property
    def size(self):
        return self.coords.shape[0]

    @property
    def weight(self):
        """Nodal quadrature weight (uniform)."""
        return self.h ** self.dim

    @property
    def quad_weights(self):
        return np.full(self.size, self.weight)

    def check(self, u, name="u"):
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.size:
            raise ValueError(
                f"{name} has {u.shape[0]} nodes but the domain has {self.size}"
            )
        return u

    # -- linear algebra -------------------------------------------------
    def apply(self, u):
        return self.stiffness @ u

    def solve(self, rhs):
        """Solve ``L x = rhs`` (columns of a 2D ``rhs`` solved independently)."""
        rhs = np.asarray(rhs, dtype=float)
        if self.dim == 1:
            return cho_solve_banded((self._poisson, False), rhs)
        if rhs.ndim == 1:
            return self._poisson(rhs)
        return np.column_stack([self._poisson(col) for col in rhs.T])

    def solve_shifted(self, scale, shift, rhs):
        """Solve ``(scale * L + diag(shift)) x = rhs`` with ``shift >= 0``."""
        if self.dim == 1:
            inv_h2 = 1.0 / self.h**2
            ab = np.empty((2, self.size))
            ab[0, 0] = 0.0
            ab[0, 1:] = -scale * inv_h2
            ab[1, :] = 2.0 * scale * inv_h2 + shift
            return solveh_banded(ab, rhs, check_finite=False)
        mat = (scale * self.stiffness + sp.diags(shift)).tocsc()
        return spsolve(mat, rhs)

    # -- norms ------------------------------------------------------------
    def h1_inner(self, u, v):
        u = self.check(u)
        v = self.check(v, "v")
        return self.weight * float(u @ (self.stiffness @ v))

    def h1_norm(self, u):
        return np.sqrt(max(self.h1_inner(u, u), 0.0))

    def lp_norm(self, u, q):
        if q < 1:
            raise ValueError(f"exponent q must be >= 1, got {q}")
        u = self.check(u)
        return float((self.weight * np.sum(np.abs(u) ** q)) ** (1.0 / q))

    def riesz(self, load):
        """H^1_0 representative of the functional ``v -> load @ v``."""
        return self.solve(load) / self.weight


def build_domain(dim, n):
    """Assemble the Dirichlet Laplacian on ``n`` interior points per axis."""
    if dim not in (1, 2):
        raise ConfigurationError(f"dim must be 1 or 2, got {dim}")
    if int(n) != n or n < 3:
        raise ConfigurationError(f"need at least 3 interior points per axis, got n={n}")
    n = int(n)
    h = 1.0 / (n + 1)
    x = np.arange(1, n + 1) * h
    t1 = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h**2
    if dim == 1:
        coords = x[:, None]
        stiffness = t1.tocsr()
        ab = np.zeros((2, n))
        ab[0, 1:] = -1.0 / h**2
        ab[1, :] = 2.0 / h**2
        poisson = cholesky_banded(ab)
    else:
        X, Y = np.meshgrid(x, x, indexing="ij")
        coords = np.column_stack([X.ravel(), Y.ravel()])
        eye = sp.identity(n)
        stiffness = (sp.kron(t1, eye) + sp.kron(eye, t1)).tocsr()
        poisson = factorized(stiffness.tocsc())
    return DiscreteDomain(dim, n, h, coords, stiffness, poisson)


def closed_form_eigenpairs_1d(n, m):
    """Exact discrete sine modes: ``lambda_j = (2/h^2)(1 - cos(j pi h))``.

    Vectors are returned with unit H^1_0 norm and positive first entry.
    """
    h = 1.0 / (n + 1)
    j = np.arange(1, m + 1)
    lam = (2.0 / h**2) * (1.0 - np.cos(j * np.pi * h))
    x = np.arange(1, n + 1) * h
    vecs = np.sin(np.pi * np.outer(x, j))
    vecs /= np.sqrt(h * lam * np.sum(vecs**2, axis=0))
    return lam, vecs


@dataclass(frozen=True, eq=False, repr=False)
class SpectralBasis:
    """Leading Dirichlet eigenpairs, H^1_0-orthonormal, grouped by eigenvalue."""

    domain: DiscreteDomain
    eigenvalues: np.ndarray
    vectors: np.ndarray
    groups: tuple

    def __repr__(self):
        return f"SpectralBasis(m_max={self.m_max}, blocks={self.n_blocks}, {self.domain!r})"

    @property
    def m_max(self):
        return self.eigenvalues.shape[0]

    @property
    def n_blocks(self):
        return len(self.groups)

    def block_indices(self, first, last=None):
        """Mode indices in eigenspace blocks ``first..last`` (1-based, inclusive)."""
        last = self.n_blocks if last is None else last
        if not 1 <= first <= last <= self.n_blocks:
            raise ValueError(f"block range {first}..{last} outside 1..{self.n_blocks}")
        return np.concatenate(self.groups[first - 1 : last])

    def project(self, u, m):
        """H^1_0 projection coefficients of ``u`` onto the first ``m`` blocks."""
        u = self.domain.check(u)
        idx = self.block_indices(1, m)
        E = self.vectors[:, idx]
        return self.domain.weight * (E.T @ (self.domain.stiffness @ u))

    def combine(self, coeffs, indices):
        return self.vectors[:, indices] @ np.asarray(coeffs, dtype=float)

    def residuals(self):
        """Relative eigen-residuals ``|L e - lambda e| / (lambda |e|)``."""
        L = self.domain.stiffness
        R = L @ self.vectors - self.vectors * self.eigenvalues
        return np.linalg.norm(R, axis=0) / (
            self.eigenvalues * np.linalg.norm(self.vectors, axis=0)
        )

    def gram(self):
        E = self.vectors
        return self.domain.weight * (E.T @ (self.domain.stiffness @ E))


def _group(values):
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > GROUP_RTOL * values[i]:
            groups.append(np.arange(start, i))
            start = i
    return groups


def _fix_sign(vecs):
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        first = np.flatnonzero(np.abs(col) > 1e-3 * np.abs(col).max())[0]
        if col[first] < 0:
            vecs[:, j] = -col
    return vecs


def eigenbasis(domain, m):
    """Smallest ``m`` eigenpairs of ``L``.

    The last eigenspace is completed when ``m`` cuts through a multiple
    eigenvalue, so the result may hold slightly more than ``m`` modes.
    """
    N = domain.size
    if m < 1 or m > N:
        raise ConfigurationError(f"cannot compute {m} eigenpairs on {N} nodes")
    if domain.dim == 1:
        h2 = domain.h**2
        vals, vecs = eigh_tridiagonal(
            np.full(N, 2.0 / h2), np.full(N - 1, -1.0 / h2), select="i",
            select_range=(0, m - 1),
        )
    else:
        k = min(m + 8, N - 1)
        vals, vecs = eigsh(domain.stiffness.tocsc(), k=k, sigma=0.0, which="LM",
                           v0=np.ones(N), tol=0.0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    groups = _group(vals)
    kept, count = [], 0
    for g in groups:
        if count >= m:
            break
        last_computed = g[-1] == len(vals) - 1 and len(vals) < N and domain.dim == 2
        if last_computed and count + len(g) > m:
            # the block may continue past what was computed
            break
        kept.append(g)
        count += len(g)
    idx = np.concatenate(kept)
    vals, vecs = vals[idx], vecs[:, idx]
    for g in kept:
        if len(g) > 1:
            q, _ = np.linalg.qr(vecs[:, g])
            lam = np.mean(vals[g])
            vecs[:, g] = q
            vals[g] = lam
    vecs = _fix_sign(vecs)
    vecs = vecs / np.sqrt(domain.weight * vals * np.sum(vecs**2, axis=0))
    return SpectralBasis(domain, vals, vecs, tuple(g.copy() for g in kept))


def random_function(basis, rng, modes=64, decay=1.0, norm=1.0):
    """Gaussian mode coefficients with ``j**-decay`` decay, scaled to ``norm``."""
    k = min(modes, basis.m_max)
    coeffs = rng.standard_normal(k) / np.arange(1, k + 1) ** decay
    u = basis.vectors[:, :k] @ coeffs
    return u * (norm / basis.domain.h1_norm(u))


def lq_ascent(domain, u0, q, gradient_map=None, max_iter=2000, rtol=1e-13):
    """Maximise ``|u|_q`` on the H^1_0 unit sphere from ``u0``.

    Iterates ``u <- R(grad) / |R(grad)|`` with ``R`` the Riesz map (or
    ``gradient_map`` for a subspace version).  For the convex functional
    ``|u|_q^q`` every step is an ascent step.  Returns ``(ratio, u)``.
    """
    riesz = gradient_map or domain.riesz
    w = domain.weight
    u = u0 / domain.h1_norm(u0)
    val = domain.lp_norm(u, q)
    for _ in range(max_iter):
        g = riesz(w * q * np.abs(u) ** (q - 2) * u)
        u_new = g / domain.h1_norm(g)
        new = domain.lp_norm(u_new, q)
        u = u_new
        if new - val <= rtol * new:
            val = max(val, new)
            break
        val = new
    return val, u


def sobolev_constant(domain, q, basis=None, starts=(), max_iter=2000):
    """Estimate ``sup |u|_q / |u|_{H^1_0}`` over the whole grid space.

    Starts from the principal mode (the global maximiser is a positive
    bump) plus any extra ``starts``; returns the best ratio.
    """
    seeds = list(starts)
    if basis is not None:
        seeds.insert(0, basis.vectors[:, 0])
    else:
        x = domain.coords
        seeds.insert(0, np.prod(np.sin(np.pi * x), axis=1))
    return max(lq_ascent(domain, s, q, max_iter=max_iter)[0] for s in seeds)
