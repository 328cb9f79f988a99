"""Solver output records and sign classification."""

from dataclasses import dataclass, field

import numpy as np

from ..operator import negative_part, positive_part

BRANCH_TOL = 1e-8


def classify(norm_plus, norm_minus, tol=BRANCH_TOL):
    """``positive`` / ``negative`` / ``sign-changing`` (or ``zero``) from part norms."""
    if norm_plus <= tol and norm_minus <= tol:
        return "zero"
    if norm_minus <= tol:
        return "positive"
    if norm_plus <= tol:
        return "negative"
    return "sign-changing"


def sign_changes(u, rel=1e-8):
    """Number of sign changes of the nodal values, ignoring near-zero entries."""
    u = np.asarray(u, dtype=float)
    top = np.max(np.abs(u)) if u.size else 0.0
    s = np.sign(u[np.abs(u) > rel * top]) if top > 0 else np.array([])
    return int(np.sum(s[1:] != s[:-1]))


@dataclass(eq=False)
class SolveReport:
    """A critical point together with the evidence collected while finding it.

    ``minimax_level_bracket`` is ``(lower, upper)``: the best lower bound the
    geometry provides and the largest path (or simplex) energy seen.
    ``checks`` maps postcondition names to booleans; ``extras`` carries
    solver-specific constants such as the cone radius.
    """

    u: np.ndarray
    branch: str
    energy: float
    breakdown: dict
    residual: float
    gradient_norm: float
    iterations: int
    converged: bool
    minimax_level_bracket: tuple
    norm: float
    norm_plus: float
    norm_minus: float
    message: str = ""
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.converged and all(self.checks.values())

    def summary(self):
        """JSON-ready dictionary without the grid function itself."""
        return {
            "branch": self.branch,
            "converged": bool(self.converged),
            "message": self.message,
            "energy": float(self.energy),
            "breakdown": {k: float(v) for k, v in self.breakdown.items()},
            "residual": float(self.residual),
            "gradient_norm": float(self.gradient_norm),
            "iterations": int(self.iterations),
            "minimax_level_bracket": [float(x) for x in self.minimax_level_bracket],
            "norm": float(self.norm),
            "norm_plus": float(self.norm_plus),
            "norm_minus": float(self.norm_minus),
            "sign_changes": sign_changes(self.u),
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "extras": _plain(self.extras),
            "trace": {
                "energy": [float(x) for x in self.energies],
                "residual": [float(x) for x in self.residuals],
            },
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def build_report(problem, flow, bracket, checks=None, extras=None):
    """Assemble a :class:`SolveReport` from a finished :class:`FlowResult`."""
    dom = problem.domain
    st = flow.state
    u = st.u
    npl = dom.h1_norm(positive_part(u))
    nmi = dom.h1_norm(negative_part(u))
    return SolveReport(
        u=u,
        branch=classify(npl, nmi),
        energy=st.energy,
        breakdown=st.breakdown.as_dict(),
        residual=flow.residual,
        gradient_norm=st.gradient.norm,
        iterations=flow.iterations,
        converged=flow.converged,
        minimax_level_bracket=tuple(bracket),
        norm=np.sqrt(st.norm_sq),
        norm_plus=npl,
        norm_minus=nmi,
        message=flow.message,
        energies=list(flow.energies),
        residuals=list(flow.residuals),
        checks=dict(checks or {}),
        extras=dict(extras or {}),
    )
