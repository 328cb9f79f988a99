"""Explicit Euler descent along ``u - A(u)`` with backtracking.

Every accepted step satisfies one of two tests:

* Armijo: ``J(trial) <= J(u) - sigma s <J'(u), u - A(u)>`` while that
  decrease is larger than the rounding noise in ``J``;
* residual decrease ``|trial - A(trial)| <= (1 - 1e-3 s) |u - A(u)|`` once
  it is not.  Near a critical point the energy is flat to within rounding,
  and only the residual still carries information.
"""

from dataclasses import dataclass, field

import numpy as np

from ..energy import State
from ..exceptions import ConfigurationError
from ..operator import apply_A
from .peaks import PeakFailure

NOISE_FACTOR = 64.0


@dataclass(frozen=True)
class FlowConfig:
    """Step control for :func:`descent_flow`.

    ``armijo`` is ``(factor, slope)``: the backtracking contraction and the
    sufficient-decrease constant.
    """

    step0: float = 1.0
    armijo: tuple = (0.5, 1e-4)
    tol: float = 1e-9
    max_iter: int = 50_000
    path_nodes: int = 33
    min_step: float = 1e-12

    def __post_init__(self):
        factor, slope = self.armijo
        if not self.step0 > 0:
            raise ConfigurationError(f"step0 must be positive, got {self.step0}")
        if not 0 < factor < 1:
            raise ConfigurationError(f"backtracking factor must lie in (0, 1), got {factor}")
        if not 0 < slope < 1:
            raise ConfigurationError(f"Armijo slope must lie in (0, 1), got {slope}")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise ConfigurationError(f"max_iter must be a nonnegative integer, got {self.max_iter}")
        if int(self.path_nodes) != self.path_nodes or self.path_nodes < 3:
            raise ConfigurationError(f"path_nodes must be an integer >= 3, got {self.path_nodes}")


def energy_noise(state):
    """Size of the rounding error in ``J``: a few ulps of its largest term."""
    br = state.breakdown
    scale = abs(br.quad_a) + abs(br.quart_b) + abs(br.poisson_quarter) + abs(br.potential)
    return NOISE_FACTOR * np.finfo(float).eps * scale


def nonincreasing(values, noise):
    """``values`` never rises by more than the rounding bands of the two values compared."""
    return all(b <= a + na + nb for a, b, na, nb in zip(values, values[1:], noise, noise[1:]))


@dataclass(eq=False)
class FlowResult:
    u: np.ndarray
    state: State
    aux: object
    iterations: int
    converged: bool
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    noise: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    message: str = ""

    @property
    def energy(self):
        return self.state.energy

    @property
    def residual(self):
        return self.aux.residual


def descent_flow(problem, u0, config=None, peak=None, tube=None, on_step=None):
    """Iterate ``u <- u - s (u - A(u))`` until the residual drops below ``tol``.

    ``peak`` (a peak map from :mod:`.peaks`) re-maximises each trial over
    its peak set; without one the flow is steepest descent in the metric
    of ``A``.  ``tube = (geometry, sign)`` rejects any trial that leaves the
    cone neighbourhood ``sign * D0``, so a start inside the tube never
    leaves it.  ``on_step(iteration, state, aux)`` is called after every
    accepted step.

    Exhausting ``max_iter``, or a step that shrinks below ``min_step`` while
    the residual is still large, ends the flow with ``converged=False`` and
    an explanatory ``message``; nothing is raised.
    """
    cfg = FlowConfig() if config is None else config
    factor, slope = cfg.armijo
    st = State(problem, u0)
    aux = apply_A(problem, st.u, st)
    if aux.residual > cfg.tol and peak is not None:
        st = peak.select(st.u, warm=False).state
        aux = apply_A(problem, st.u, st)

    res = FlowResult(st.u, st, aux, 0, False)
    res.energies.append(st.energy)
    res.residuals.append(aux.residual)
    res.noise.append(energy_noise(st))
    s_prev = cfg.step0
    it = 0
    while aux.residual > cfg.tol and it < cfg.max_iter:
        s = min(cfg.step0, s_prev / factor)
        J, noise = st.energy, res.noise[-1]
        while True:
            trial = _trial(problem, st.u - s * aux.direction, peak, tube)
            if trial is not None:
                st_t, aux_t = trial
                if _accept(J, noise, aux, st_t, aux_t, s, slope):
                    break
            s *= factor
            if s < cfg.min_step:
                break
        if s < cfg.min_step:
            res.message = (
                f"stagnation: no admissible step above {cfg.min_step:g} at residual "
                f"{aux.residual:.3e} (|J'| = {st.gradient.norm:.3e})"
            )
            break
        it += 1
        s_prev = s
        st, aux = st_t, aux_t
        res.energies.append(st.energy)
        res.residuals.append(aux.residual)
        res.noise.append(energy_noise(st))
        res.steps.append(s)
        if on_step is not None:
            on_step(it, st, aux)

    res.u, res.state, res.aux, res.iterations = st.u, st, aux, it
    res.converged = aux.residual <= cfg.tol
    if res.converged:
        res.message = "converged"
    elif not res.message:
        res.message = f"max_iter={cfg.max_iter} reached at residual {aux.residual:.3e}"
    return res


def _trial(problem, w, peak, tube):
    try:
        st = peak.select(w, warm=True).state if peak is not None else State(problem, w)
    except (PeakFailure, ValueError, FloatingPointError, np.linalg.LinAlgError):
        return None
    if tube is not None:
        geometry, sign = tube
        if not geometry.in_tube(st.u, sign):
            return None
    return st, apply_A(problem, st.u, st)


def _accept(J, noise, aux, st_t, aux_t, s, slope):
    decrease = slope * s * aux.pairing
    if decrease >= noise:
        return st_t.energy <= J - decrease and aux_t.residual <= 2.0 * aux.residual
    return aux_t.residual <= (1.0 - 1e-3 * s) * aux.residual
