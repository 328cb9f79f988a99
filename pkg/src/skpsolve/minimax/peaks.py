"""Peak selections: maximisers of ``J`` over small sets built from a direction.

A peak map turns an arbitrary grid function ``w`` into the maximiser of the
energy over a low-dimensional set that contains ``w``:

* :class:`RayPeak`       the ray ``{t w : t > 0}``;
* :class:`NodalPeak`     the quarter plane ``{s w^+ + t w^- : s, t > 0}``;
* :class:`SubspacePeak`  ``span(support) + {t w_perp : t > 0}``.

Descending along ``u - A(u)`` and re-selecting the peak keeps the iterate on
a minimax path, which is what turns plain descent into a saddle search.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from ..energy import State
from ..exceptions import ParameterError
from ..operator import negative_part, positive_part


SUPPORT_RTOL = 1e-9


class PeakFailure(ArithmeticError):
    """No interior maximiser could be located for the given direction."""


@dataclass(frozen=True, eq=False)
class Peak:
    u: np.ndarray
    coeffs: np.ndarray
    state: State


class RayPeak:
    """Maximiser of ``t -> J(t w)`` over ``t > 0``.

    For the split power family the ray derivative divided by ``t`` is

        g(t) = a A + (b A^2 + G) t^2 - Q t^(p-2),

    with ``A = |w|^2``, ``G = int phi_w w^2`` and ``Q = int w f(w)``, so the
    peak is the unique positive root of ``g`` and costs a single Poisson solve.
    """

    def __init__(self, problem):
        self.problem = problem

    def scalars(self, w):
        st = State(self.problem, w)
        dom = self.problem.domain
        Q = dom.weight * float(w @ self.problem.f(w))
        return st.norm_sq, st.poisson.pairing, Q

    def scale(self, w):
        pb = self.problem
        A, G, Q = self.scalars(w)
        if not (A > 0 and Q > 0):
            raise PeakFailure("energy is not unbounded below along this ray")
        expo = pb.nonlinearity.p - 2.0
        quartic = pb.b * A * A + G

        def g(t):
            return pb.a * A + quartic * t * t - Q * t**expo

        hi = 1.0
        while g(hi) > 0:
            hi *= 2.0
            if hi > 1e150:
                raise PeakFailure("ray peak bracket overflow")
        lo = hi / 2.0
        while g(lo) < 0:
            lo /= 2.0
        return brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)

    def select(self, w, warm=False):
        t = self.scale(w)
        u = t * w
        return Peak(u, np.array([t]), State(self.problem, u))


def _span_gradient(problem, Y, c):
    st = State(problem, Y @ c)
    return Y.T @ st.load, st


def maximize_on_span(problem, Y, c0, positive, max_newton=60, fd_rel=1e-6):
    """Critical point of ``c -> J(Y c)`` that is a local maximum.

    Newton's method with a central-difference Hessian; when that Hessian is
    not negative definite, or a step would leave the admissible region
    ``c[positive] > 0``, a quasi-Newton ascent restarts the search.
    """
    positive = np.asarray(positive, dtype=bool)
    c = np.asarray(c0, dtype=float).copy()
    try:
        return _newton_max(problem, Y, c, positive, max_newton, fd_rel)
    except PeakFailure:
        pass

    def neg(cc):
        st = State(problem, Y @ cc)
        return -st.energy, -(Y.T @ st.load)

    res = minimize(neg, c, jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": 5000})
    if not np.all(res.x[positive] > 0):
        raise PeakFailure("ascent left the admissible cone of coefficients")
    return _newton_max(problem, Y, res.x, positive, max_newton, fd_rel)


def _newton_max(problem, Y, c, positive, max_newton, fd_rel):
    k = len(c)
    g, st = _span_gradient(problem, Y, c)
    for _ in range(max_newton):
        H = np.empty((k, k))
        for j in range(k):
            hj = fd_rel * max(1.0, abs(c[j]))
            e = np.zeros(k)
            e[j] = hj
            H[:, j] = (_span_gradient(problem, Y, c + e)[0]
                       - _span_gradient(problem, Y, c - e)[0]) / (2 * hj)
        H = 0.5 * (H + H.T)
        if not np.all(np.isfinite(H)) or np.linalg.eigvalsh(H).max() >= 0:
            raise PeakFailure("span Hessian is not negative definite")
        step = np.linalg.solve(H, -g)
        lam = 1.0
        while np.any(c[positive] + lam * step[positive] <= 0):
            lam *= 0.5
            if lam < 1e-8:
                raise PeakFailure("Newton step leaves the admissible cone")
        c = c + lam * step
        g, st = _span_gradient(problem, Y, c)
        if np.linalg.norm(lam * step) <= 1e-14 * np.linalg.norm(c):
            break
    return c, st


class NodalPeak:
    """Maximiser of ``J(s w^+ + t w^-)`` over ``s, t > 0``.

    A cold start scans a logarithmic grid below the two single-part ray
    peaks; a warm start assumes ``w`` already sits next to the peak set,
    so ``(1, 1)`` is a good Newton seed.
    """

    def __init__(self, problem, grid=24):
        self.problem = problem
        self.grid = grid
        self._ray = RayPeak(problem)

    def columns(self, w):
        wp, wn = positive_part(w), negative_part(w)
        if not (np.any(wp > 0) and np.any(wn < 0)):
            raise PeakFailure("direction does not change sign")
        return np.column_stack([wp, wn])

    def initial_coeffs(self, Y):
        t_plus = self._ray.scale(Y[:, 0])
        t_minus = self._ray.scale(Y[:, 1])
        ratios = np.geomspace(0.02, 1.0, self.grid)
        best, arg = -np.inf, None
        for rs in ratios:
            for rt in ratios:
                c = np.array([rs * t_plus, rt * t_minus])
                en = State(self.problem, Y @ c).energy
                if en > best:
                    best, arg = en, c
        return arg

    def select(self, w, warm=False):
        Y = self.columns(w)
        c0 = np.ones(2) if warm else self.initial_coeffs(Y)
        c, st = maximize_on_span(self.problem, Y, c0, positive=[True, True])
        return Peak(st.u, c, st)


class SubspacePeak:
    """Maximiser of ``J`` over ``span(support) + {t w_perp : t > 0}``.

    ``support`` holds H^1_0-orthonormal columns (the leading eigenmodes);
    ``w_perp`` is the part of ``w`` orthogonal to them.  With an empty
    support this reduces to :class:`RayPeak`.
    """

    def __init__(self, problem, support):
        self.problem = problem
        self.support = np.asarray(support, dtype=float).reshape(problem.domain.size, -1)
        self._ray = RayPeak(problem)

    def split(self, w):
        dom = self.problem.domain
        S = self.support
        coef = dom.weight * (S.T @ (dom.stiffness @ w))
        perp = w - S @ coef
        norm = dom.h1_norm(perp)
        # projection round-off leaves about 1e-12 relative for members of the span
        if not norm > SUPPORT_RTOL * max(dom.h1_norm(w), 1e-300):
            raise PeakFailure("direction lies in the support space")
        return coef, perp / norm, norm

    def select(self, w, warm=False):
        coef, unit, norm = self.split(w)
        Y = np.column_stack([self.support, unit])
        if warm:
            c0 = np.append(coef, norm)
        else:
            c0 = np.append(np.zeros(self.support.shape[1]), self._ray.scale(unit))
        positive = np.zeros(Y.shape[1], dtype=bool)
        positive[-1] = True
        c, st = maximize_on_span(self.problem, Y, c0, positive)
        return Peak(st.u, c, st)


def require_peak(peak_map, w, warm=False):
    """``peak_map.select`` that reports failures as :class:`ParameterError`."""
    try:
        return peak_map.select(w, warm=warm)
    except PeakFailure as err:
        raise ParameterError(f"no energy peak along the initial direction: {err}") from err
