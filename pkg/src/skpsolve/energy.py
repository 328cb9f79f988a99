"""Energy of the Kirchhoff-Poisson problem, its derivative and H^1_0 gradient.

    J(u) = a/2 |u|^2 + b/4 |u|^4 + 1/4 int phi_u u^2 - int F(x, u)

All integrals use the nodal quadrature of the domain.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import HypothesisViolation
from .nonlinearity import NonlinearitySpec
from .poisson import solve_phi


@dataclass(frozen=True, eq=False)
class Problem:
    """Model constants ``a > 0``, ``b >= 0`` on a domain with a reaction term."""

    domain: object
    nonlinearity: NonlinearitySpec
    a: float = 1.0
    b: float = 1.0
    kappa: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.a > 0:
            raise HypothesisViolation(f"need a > 0, got a={self.a}")
        if not self.b >= 0:
            raise HypothesisViolation(f"need b >= 0, got b={self.b}")
        object.__setattr__(self, "kappa", self.nonlinearity.kappa_values(self.domain.coords))

    def f(self, u):
        return self.nonlinearity.f(u, self.kappa)

    def F(self, u):
        return self.nonlinearity.F(u, self.kappa)

    def state(self, u):
        return State(self, u)


class State:
    """A grid function with lazily cached potential, energy and gradient."""

    def __init__(self, problem, u):
        u = problem.domain.check(u)
        if not np.all(np.isfinite(u)):
            raise ValueError("non-finite values in u")
        self.problem = problem
        self.u = u

    @cached_property
    def Lu(self):
        return self.problem.domain.stiffness @ self.u

    @cached_property
    def norm_sq(self):
        return self.problem.domain.weight * float(self.u @ self.Lu)

    @cached_property
    def poisson(self):
        return solve_phi(self.problem.domain, self.u)

    @property
    def phi(self):
        return self.poisson.phi

    @cached_property
    def kirchhoff(self):
        return self.problem.a + self.problem.b * self.norm_sq

    @cached_property
    def breakdown(self):
        pb, w = self.problem, self.problem.domain.weight
        ns = self.norm_sq
        quad_a = 0.5 * pb.a * ns
        quart_b = 0.25 * pb.b * ns * ns
        poisson_quarter = 0.25 * self.poisson.pairing
        potential = w * float(np.sum(pb.F(self.u)))
        total = quad_a + quart_b + poisson_quarter - potential
        return EnergyBreakdown(quad_a, quart_b, poisson_quarter, potential, total)

    @property
    def energy(self):
        return self.breakdown.total

    @cached_property
    def excess(self):
        """``(a + b|u|^2) L u + phi u - f(u)``, evaluated in extended precision.

        Near a critical point the three terms nearly cancel, and ``L u``
        alone loses about ``log10(1/(h^2 lambda))`` digits to differencing,
        so double precision would put a floor on every residual.
        """
        pb, dom = self.problem, self.problem.domain
        ue = self.u.astype(np.longdouble)
        Lu = dom.stiffness @ ue
        kirchhoff = pb.a + pb.b * (dom.weight * (ue @ Lu))
        return (kirchhoff * Lu + self.phi * ue - pb.f(ue)).astype(float)

    @cached_property
    def load(self):
        """Euclidean derivative: ``dJ(u)[v] == load @ v``."""
        return self.problem.domain.weight * self.excess

    @cached_property
    def gradient(self):
        dom = self.problem.domain
        g = dom.riesz(self.load)
        norm = np.sqrt(max(dom.weight * float(g @ (dom.stiffness @ g)), 0.0))
        return GradientVector(g, norm)

    def derivative(self, v):
        return float(self.load @ v)


@dataclass(frozen=True)
class EnergyBreakdown:
    quad_a: float
    quart_b: float
    poisson_quarter: float
    potential: float
    total: float

    def as_dict(self):
        return {
            "quad_a": self.quad_a,
            "quart_b": self.quart_b,
            "poisson_quarter": self.poisson_quarter,
            "potential": self.potential,
            "total": self.total,
        }


@dataclass(frozen=True, eq=False)
class GradientVector:
    g: np.ndarray
    norm: float


def energy(problem, u):
    return State(problem, u).breakdown


def gradient(problem, u):
    return State(problem, u).gradient


def directional_derivative(problem, u, v):
    return State(problem, u).derivative(problem.domain.check(v, "v"))


@dataclass(frozen=True)
class ARGap:
    gap: float
    lower_bound: float

    @property
    def holds(self):
        return self.gap >= self.lower_bound - 1e-10


def ar_gap(problem, u):
    """``J(u) - <J'(u), u>/mu`` and its coercive lower bound."""
    st = State(problem, u)
    mu = problem.nonlinearity.mu
    gap = st.energy - st.derivative(st.u) / mu
    ns = st.norm_sq
    lower = problem.a * (0.5 - 1 / mu) * ns + problem.b * (0.25 - 1 / mu) * ns * ns
    return ARGap(gap, lower)
