"""Sign-changing solutions by a simplex mountain pass.

The initial map sends the triangle ``{s, t >= 0, s + t <= 1}`` to
``R (s e_2^- + t e_2^+)``: its edge ``s = 0`` lies in ``+P``, the edge
``t = 0`` in ``-P`` and the outer edge has negative energy.  The deformed
maps keep that shape, ``R (s c^- u^- + t c^+ u^+)`` with ``u`` the current
iterate, so the whole family is re-maximised after each flow step.  Every
sweep re-checks the boundary conditions and that the image still meets
both cone boundaries at once.
"""

import numpy as np

from ..domain import sobolev_constant
from ..exceptions import CalibrationError
from ..operator import apply_A, default_geometry, negative_part, positive_part
from .endpoints import choose_R, intersection_check, kappa_max, linear_map, second_mode
from .flow import FlowConfig, descent_flow, energy_noise, nonincreasing
from .peaks import NodalPeak, require_peak
from .report import build_report


def part_norm_floor(problem, beta=None, basis=None):
    """Lower bound ``alpha`` on ``|u^+|`` and ``|u^-|`` for every sign-changing critical point.

    Testing ``J'(u) = 0`` with ``u^+`` gives ``a |u^+|^2 <= int u^+ f(u^+)
    <= c beta^p |u^+|^p`` with ``c = alpha_max sup kappa`` and ``beta`` the
    ``L^p`` embedding constant, hence ``|u^+| >= (a / (c beta^p))^(1/(p-2))``.
    """
    p = problem.nonlinearity.p
    if beta is None:
        beta = sobolev_constant(problem.domain, p, basis)
    c = problem.nonlinearity.alpha_max * kappa_max(problem)
    return (problem.a / (c * beta**p)) ** (1.0 / (p - 2.0)), beta


def _shapes_like(u, ref_minus, ref_plus, dom):
    up, un = positive_part(u), negative_part(u)
    return (un * (dom.h1_norm(ref_minus) / dom.h1_norm(un)),
            up * (dom.h1_norm(ref_plus) / dom.h1_norm(up)))


def _outer_edge_negative(problem, smap):
    return float(smap.energies(problem)[smap.outer_edge].max()) < 0


def find_sign_changing(problem, basis, config=None, geometry=None, R=None, m=32, rng=None):
    """Minimax critical point outside both cone neighbourhoods.

    ``R`` (``None`` or ``0`` for automatic) scales the simplex map; the cone
    radius comes from :func:`default_geometry` unless ``geometry`` is given.
    """
    cfg = FlowConfig() if config is None else config
    dom = problem.domain
    rng = np.random.default_rng(0) if rng is None else rng
    delta_m = None
    if geometry is None:
        geometry, _, delta_m = default_geometry(problem, basis, m, rng=rng)
    e2 = second_mode(basis)
    ref_minus, ref_plus = negative_part(e2), positive_part(e2)
    K = int(cfg.path_nodes)
    auto = choose_R(problem, basis, geometry, rng=rng)
    scale = auto.R if not R else float(R)

    smap = linear_map(K, scale, ref_minus, ref_plus)
    if not _outer_edge_negative(problem, smap):
        raise CalibrationError(f"outer edge of the simplex map has nonnegative energy at R={scale:g}",
                               suggested_mu=geometry.mu)
    peak = NodalPeak(problem)
    start = require_peak(peak, e2)
    if not geometry.in_S(start.u):
        raise CalibrationError("the initial simplex maximum lies inside a cone neighbourhood",
                               suggested_mu=geometry.mu / 2)
    lattice_max = _lattice_max_in_S(problem, smap, geometry)
    upper = max(lattice_max, start.state.energy)
    sweeps = {
        "path_max": [upper],
        "lattice_max": [lattice_max],
        "noise": [energy_noise(start.state)],
        "intersection": [intersection_check(smap, geometry)],
        "outer_edge_negative": [True],
        "R": [scale],
    }

    def on_step(it, st, aux):
        nonlocal scale
        shapes = _shapes_like(st.u, ref_minus, ref_plus, dom)
        cur = linear_map(K, scale, *shapes)
        ok = _outer_edge_negative(problem, cur)
        while not ok and scale < 1e150:
            scale *= 2.0
            cur = linear_map(K, scale, *shapes)
            ok = _outer_edge_negative(problem, cur)
        lm = _lattice_max_in_S(problem, cur, geometry)
        sweeps["lattice_max"].append(lm)
        sweeps["path_max"].append(max(lm, st.energy) if geometry.in_S(st.u) else lm)
        sweeps["noise"].append(energy_noise(st))
        sweeps["intersection"].append(intersection_check(cur, geometry))
        sweeps["outer_edge_negative"].append(ok)
        sweeps["R"].append(scale)

    flow = descent_flow(problem, start.u, cfg, peak=peak, on_step=on_step)
    u = flow.u
    alpha, beta = part_norm_floor(problem, basis=basis)
    npl, nmi = dom.h1_norm(positive_part(u)), dom.h1_norm(negative_part(u))
    level_floor = problem.a * geometry.mu**2 / 8.0
    checks = {
        "residual_below_tol": flow.converged,
        "parts_above_alpha": min(npl, nmi) >= alpha,
        "energy_above_level_floor": flow.energy >= level_floor,
        "outside_cone_tubes": geometry.in_S(u),
        "intersection_every_sweep": all(sweeps["intersection"]),
        "outer_edge_negative_every_sweep": all(sweeps["outer_edge_negative"]),
        "path_max_nonincreasing": nonincreasing(sweeps["path_max"], sweeps["noise"]),
    }
    mirror = None
    if problem.nonlinearity.is_odd:
        mirror = apply_A(problem, -u).residual
        checks["mirror_critical"] = mirror <= cfg.tol
    extras = {
        "alpha": alpha,
        "sobolev_beta": beta,
        "mu": geometry.mu,
        "delta_m": delta_m,
        "level_floor": level_floor,
        "R": sweeps["R"][0],
        "R_final": scale,
        "R_auto": auto.R,
        "l2_delta": auto.delta,
        "kappa2": auto.kappa2,
        "path_nodes": K,
        "mirror_residual": mirror,
        "sweeps": sweeps,
    }
    return build_report(problem, flow, (level_floor, upper), checks, extras)


def _lattice_max_in_S(problem, smap, geometry):
    d_plus, d_minus = smap.distances(geometry)
    inside = (d_plus >= geometry.mu) & (d_minus >= geometry.mu)
    if not np.any(inside):
        return -np.inf
    return float(smap.energies(problem)[inside].max())
