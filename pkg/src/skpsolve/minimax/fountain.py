"""Fountain-type level estimates and a multi-start search for higher nodal solutions.

For odd problems the energy is bounded below on spheres of the tail spaces
``Z_k`` (spans of eigenspaces ``k, k+1, ...``) by levels that grow with
``k``.  :func:`fountain_estimates` computes those levels from the embedding
constants ``beta_k = sup |v|_p`` over the unit sphere of ``Z_k``.
:func:`multi_start_sign_changing` looks for critical points at or above
such a level with a minimax search whose support space is ``Y_{k-1}``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..domain import lq_ascent
from ..exceptions import HypothesisViolation, ParameterError
from ..operator import apply_A
from .endpoints import kappa_max
from .flow import FlowConfig, descent_flow
from .peaks import PeakFailure, SubspacePeak
from .report import build_report


@dataclass(frozen=True)
class FountainRow:
    k: int
    beta: float
    r: float
    b_lower: float


def tail_columns(basis, k, m=None):
    """Mode columns spanning blocks ``k..m`` (the truncated tail space)."""
    m = basis.n_blocks if m is None else min(m, basis.n_blocks)
    return basis.vectors[:, basis.block_indices(k, m)]


def _beta(dom, E, p, starts):
    def gmap(load):
        return E @ (E.T @ load)

    best, arg = -np.inf, None
    for s in starts:
        val, v = lq_ascent(dom, s, p, gradient_map=gmap)
        if val > best:
            best, arg = val, v
    return best, arg


def fountain_estimates(problem, basis, k_range=range(2, 11), m=None, starts=20, rng=None):
    """``beta_k``, ``r_k`` and the level bound ``b_k`` for each ``k`` in ``k_range``.

    With ``F(x, t) <= c_1 |t|^p`` (``c_1 = alpha_max sup kappa / p``),

        r_k = (p c_1 beta_k^p / a)^(1/(2-p)),
        b_k = a (1/2 - 1/p) (p c_1 beta_k^p / a)^(2/(2-p)).

    ``beta_k`` is the best of ``starts`` projected ascents on the unit sphere
    of ``Z_k``.  The ``k`` values are processed from the largest down and
    the maximiser for ``k + 1`` seeds the search for ``k``; since
    ``Z_{k+1}`` is inside ``Z_k`` this makes ``beta_k`` nonincreasing by
    construction.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    dom, p, a = problem.domain, problem.nonlinearity.p, problem.a
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 2 or ks[-1] > basis.n_blocks:
        raise ParameterError(f"k range must lie in 2..{basis.n_blocks}")
    c1 = problem.nonlinearity.alpha_max * kappa_max(problem) / p
    rows, carry = {}, None
    for k in reversed(ks):
        E = tail_columns(basis, k, m)
        seeds = [E @ rng.standard_normal(E.shape[1]) for _ in range(starts)]
        seeds.insert(0, E[:, 0])
        if carry is not None:
            seeds.insert(0, carry)
        beta, carry = _beta(dom, E, p, seeds)
        base = p * c1 * beta**p / a
        rows[k] = FountainRow(k, beta, base ** (1.0 / (2.0 - p)),
                              a * (0.5 - 1.0 / p) * base ** (2.0 / (2.0 - p)))
    return [rows[k] for k in ks]


def fountain_trends(rows):
    """Monotonicity flags for a table from :func:`fountain_estimates`."""
    beta = np.array([r.beta for r in rows])
    rk = np.array([r.r for r in rows])
    bl = np.array([r.b_lower for r in rows])
    return {
        "beta_positive": bool(np.all(beta > 0)),
        "beta_nonincreasing": bool(np.all(np.diff(beta) <= 0)),
        "r_nondecreasing": bool(np.all(np.diff(rk) >= 0)),
        "b_lower_ratio": float(bl[-1] / bl[0]) if len(bl) > 1 else 1.0,
    }


@dataclass(eq=False)
class MultiStartResult:
    k: int
    count: int
    r_k: float
    b_lower: float
    solutions: list = field(default_factory=list)
    attempts: list = field(default_factory=list)

    @property
    def energies(self):
        return [s.energy for s in self.solutions]

    def levels(self, rtol=1e-10):
        """Distinct critical values (energies equal up to ``rtol`` share a level)."""
        out = []
        for e in self.energies:
            if not out or e - out[-1] > rtol * max(abs(e), abs(out[-1])):
                out.append(e)
        return out

    @property
    def increasing(self):
        """At least two distinct levels were found (they are listed in increasing order)."""
        return len(self.levels()) >= 2


def _one_start(problem, peak, E, r_k, seed, cfg, b_lower):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(E.shape[1]) / np.arange(1, E.shape[1] + 1)
    w = E @ c
    w *= r_k / problem.domain.h1_norm(w)
    try:
        flow = descent_flow(problem, w, cfg, peak=peak)
    except (PeakFailure, ParameterError) as err:
        return None, {"converged": False, "message": f"peak selection failed: {err}"}
    report = build_report(
        problem, flow, (b_lower, max(flow.energies)),
        checks={"residual_below_tol": flow.converged},
    )
    report.checks["sign_changing"] = report.branch == "sign-changing"
    report.checks["above_level_bound"] = report.energy >= b_lower
    mirror = apply_A(problem, -report.u).residual
    report.checks["mirror_critical"] = mirror <= cfg.tol
    report.extras["mirror_residual"] = mirror
    info = {"converged": bool(flow.converged), "message": flow.message,
            "energy": float(report.energy), "residual": float(report.residual)}
    return report, info


def multi_start_sign_changing(problem, basis, k, count, config=None, m=32, seed=0,
                              distinct_tol=1e-3, workers=1, rows=None):
    """Distinct sign-changing critical points with energy at least ``b_k``.

    Each start is a random point of the sphere ``|u| = r_k`` in ``Z_k``
    (coefficients over blocks ``k..m`` with ``1/j`` decay).  The flow uses a
    :class:`SubspacePeak` on ``Y_{k-1}``, so the search targets critical
    points of minimax type over ``Y_{k-1}`` plus one extra direction.
    Converged sign-changing points above ``b_k`` are kept; two points closer
    than ``distinct_tol`` in H^1_0 count once.  Solutions are returned in
    increasing energy order.  This is a heuristic: it reports what it
    found, never a complete list.

    Starts draw their seeds from ``numpy.random.SeedSequence(seed)``, so
    the result does not depend on ``workers``.
    """
    if not problem.nonlinearity.is_odd:
        raise HypothesisViolation(
            "multi-start search needs an odd nonlinearity: set alpha_plus == alpha_minus"
        )
    if k < 2:
        raise ParameterError("k must be at least 2")
    cfg = FlowConfig() if config is None else config
    if rows is None:
        rows = fountain_estimates(problem, basis, [k], m=m)
    row = rows[0]
    support = basis.vectors[:, basis.block_indices(1, k - 1)]
    peak = SubspacePeak(problem, support)
    E = tail_columns(basis, k, m)
    seeds = np.random.SeedSequence(seed).spawn(count)
    args = [(problem, peak, E, row.r, s, cfg, row.b_lower) for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(lambda a: _one_start(*a), args))
    else:
        outcomes = [_one_start(*a) for a in args]

    result = MultiStartResult(k, count, row.r, row.b_lower)
    dom = problem.domain
    kept = []
    for i, (report, info) in enumerate(outcomes):
        info = dict(info, start=i)
        if report is None or not all(report.checks.values()):
            info["kept"] = False
            result.attempts.append(info)
            continue
        dup = any(dom.h1_norm(report.u - other.u) <= distinct_tol for other in kept)
        info["kept"] = not dup
        info["duplicate"] = dup
        result.attempts.append(info)
        if not dup:
            report.extras["start"] = i
            kept.append(report)
    result.solutions = sorted(kept, key=lambda r: r.energy)
    return result
