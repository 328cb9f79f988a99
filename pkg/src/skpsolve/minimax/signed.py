"""Constant-sign solutions by a cone-constrained mountain pass.

The path from ``0`` to the endpoint ``e^+-`` is kept as a straight segment
through the current iterate.  Each sweep evaluates ``J`` on ``K`` path
nodes, moves the top of the path by one flow step along ``u - A(u)``,
re-maximises along the new ray, and records the path maximum.  Because
``A`` maps the cone ``+-P`` into itself, iterates started in the cone stay
there, and the tube ``+-D0`` is enforced on every trial as well.
"""

import numpy as np

from ..energy import State
from ..exceptions import ParameterError
from ..operator import ConeGeometry, apply_A, negative_part, positive_part
from .endpoints import batch_energy, build_endpoints
from .flow import FlowConfig, descent_flow, energy_noise, nonincreasing
from .peaks import RayPeak, require_peak
from .report import build_report

PURITY_RTOL = 1e-6
NODAL_FLOOR = 1e-8


def path_nodes_energy(problem, end, K):
    """``J`` at ``t_j end`` for ``t_j = j / (K - 1)``; ``end`` is the path endpoint."""
    t = np.linspace(0.0, 1.0, K)
    return t, batch_energy(problem, np.outer(t, end))


def negative_endpoint(problem, u, max_doublings=80):
    """Smallest ``2^j u`` (``j >= 1``) with negative energy."""
    end = 2.0 * u
    for _ in range(max_doublings):
        if State(problem, end).energy < 0:
            return end
        end = 2.0 * end
    raise ParameterError("the ray through the iterate never reaches negative energy")


def find_signed_solution(problem, sign, basis, config=None, endpoints=None,
                         geometry=None, mu=None):
    """Mountain-pass critical point in the cone ``sign * P``.

    ``sign`` is ``+1`` (positive solution) or ``-1`` (negative solution).
    The report's bracket is ``[c_*, max_t J(t e^+-)]``; its ``checks`` hold
    the postconditions (residual, bracket, sign purity, nodal sign).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    cfg = FlowConfig() if config is None else config
    ends = build_endpoints(problem, basis) if endpoints is None else endpoints
    if geometry is None:
        geometry = ConeGeometry(problem.domain, 1.0 / 64 if mu is None else mu)
    e = ends.e_plus if sign > 0 else ends.e_minus
    K = int(cfg.path_nodes)

    t, energies = path_nodes_energy(problem, e, K)
    top = int(np.argmax(energies))  # argmax returns the lowest index on ties
    ray = RayPeak(problem)
    start = require_peak(ray, t[top] * e if top > 0 else e)
    upper = max(float(energies.max()), start.state.energy)

    sweeps = {"path_max": [upper], "lattice_max": [float(energies.max())],
              "noise": [energy_noise(start.state)]}

    def on_step(it, st, aux):
        end = negative_endpoint(problem, st.u)
        _, en = path_nodes_energy(problem, end, K)
        sweeps["lattice_max"].append(float(en.max()))
        sweeps["path_max"].append(max(float(en.max()), st.energy))
        sweeps["noise"].append(energy_noise(st))

    flow = descent_flow(problem, start.u, cfg, peak=ray, tube=(geometry, sign), on_step=on_step)
    u = flow.u
    dom = problem.domain
    wrong = negative_part(u) if sign > 0 else positive_part(u)
    purity = dom.h1_norm(wrong) <= PURITY_RTOL * dom.h1_norm(u)
    nodal = bool(np.all(sign * u >= -NODAL_FLOOR * np.max(np.abs(u))))
    slack = 1e-12 * abs(upper)
    checks = {
        "residual_below_tol": flow.converged,
        "energy_above_c_star": flow.energy >= ends.c_star,
        "energy_below_path_max": flow.energy <= upper + slack,
        "sign_purity": purity,
        "nodal_sign": nodal,
        "in_cone_tube": geometry.in_tube(u, sign),
        "path_max_nonincreasing": nonincreasing(sweeps["path_max"], sweeps["noise"]),
    }
    extras = {
        "sign": sign,
        "c_star": ends.c_star,
        "r": ends.r,
        "c2": ends.c2,
        "sobolev_beta": ends.beta,
        "endpoint_scale": ends.t_plus if sign > 0 else ends.t_minus,
        "mu": geometry.mu,
        "path_nodes": K,
        "path_max": sweeps["path_max"],
        "noise": sweeps["noise"],
    }
    return build_report(problem, flow, (ends.c_star, upper), checks, extras)


def mirror_residual(problem, u):
    """Residual ``|v - A(v)|`` at ``v = -u`` (small iff ``-u`` is critical)."""
    return apply_A(problem, -np.asarray(u)).residual
