"""Split power-law reaction terms ``f(x, t) = kappa(x) alpha_(+/-) |t|^(p-2) t``."""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import HypothesisViolation

KappaLike = Union[float, Callable[[np.ndarray], np.ndarray]]


def _as_real(t):
    # keep extended precision when the caller asks for it
    t = np.asarray(t)
    return t if t.dtype == np.longdouble else t.astype(float)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Reaction term with exponent ``p`` and separate weights for ``t > 0``, ``t < 0``.

    ``kappa`` is a positive constant or a callable mapping node coordinates
    of shape ``(N, dim)`` to weights.  ``mu`` is the superlinearity constant
    and defaults to ``p``.
    """

    p: float = 5.0
    alpha_plus: float = 1.0
    alpha_minus: float = 1.0
    kappa: KappaLike = 1.0
    mu: Optional[float] = None

    def __post_init__(self):
        if not 4.0 < self.p < 6.0:
            raise HypothesisViolation(
                f"(f1) growth exponent must satisfy 4 < p < 6, got p={self.p}"
            )
        if self.alpha_plus < 0 or self.alpha_minus < 0:
            raise HypothesisViolation("branch weights alpha_plus, alpha_minus must be >= 0")
        if self.mu is None:
            object.__setattr__(self, "mu", float(self.p))
        if not 4.0 < self.mu <= self.p:
            raise HypothesisViolation(
                f"(f3) need 4 < mu <= p for the power family, got mu={self.mu}, p={self.p}"
            )
        if not callable(self.kappa) and not self.kappa > 0:
            raise HypothesisViolation(f"kappa must be positive, got {self.kappa}")

    @property
    def is_odd(self):
        return self.alpha_plus == self.alpha_minus

    @property
    def alpha_max(self):
        return max(self.alpha_plus, self.alpha_minus)

    def kappa_values(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if callable(self.kappa):
            vals = np.asarray(self.kappa(coords), dtype=float).reshape(coords.shape[0])
        else:
            vals = np.full(coords.shape[0], float(self.kappa))
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise HypothesisViolation("kappa must be finite and bounded away from zero")
        return vals

    def _weight(self, t, kappa):
        return kappa * np.where(t >= 0, self.alpha_plus, self.alpha_minus)

    def f(self, t, kappa=1.0):
        t = _as_real(t)
        return self._weight(t, kappa) * np.abs(t) ** (self.p - 2) * t

    def F(self, t, kappa=1.0):
        t = _as_real(t)
        return self._weight(t, kappa) * np.abs(t) ** self.p / self.p

    def df(self, t, kappa=1.0):
        t = _as_real(t)
        return (self.p - 1) * self._weight(t, kappa) * np.abs(t) ** (self.p - 2)

    def require_hypotheses(self):
        """Raise unless (f1)-(f3) hold with strict positivity of ``F``."""
        if self.alpha_plus <= 0 or self.alpha_minus <= 0:
            raise HypothesisViolation(
                "(f3) needs 0 < mu F(x,t) for t != 0, so alpha_plus and alpha_minus must be > 0"
            )
        return self


def f_eval(spec, x, t):
    return float(spec.f(t, spec.kappa_values(x)[0]))


def F_eval(spec, x, t):
    return float(spec.F(t, spec.kappa_values(x)[0]))


@dataclass(frozen=True)
class ARReport:
    worst_ratio: float
    min_mu_F: float
    samples: int
    passed: bool


def ar_check(spec, sample_count, rng=None, coords=None, t_scale=10.0):
    """Sample ``0 < mu F(x,t) <= t f(x,t)`` at random nodes and ``t != 0``.

    Raises :class:`HypothesisViolation` if any sample fails.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    if coords is None:
        coords = rng.random((sample_count, 1))
    else:
        coords = np.asarray(coords)[rng.integers(0, len(coords), sample_count)]
    kappa = spec.kappa_values(coords)
    t = rng.uniform(-t_scale, t_scale, sample_count)
    t[t == 0] = 1.0
    muF = spec.mu * spec.F(t, kappa)
    tf = t * spec.f(t, kappa)
    ok = (muF > 0) & (muF <= tf * (1 + 1e-14))
    ratio = np.min(tf / muF) if np.all(muF > 0) else 0.0
    report = ARReport(float(ratio), float(np.min(muF)), sample_count, bool(np.all(ok)))
    if not report.passed:
        raise HypothesisViolation(f"(f3) fails on sampled points: {report}")
    return report


def growth_bound(spec, epsilon, kappa_sup=None, coords=None):
    """Smallest ``c_eps`` with ``|f(x,t)| <= eps |t| + c_eps |t|^(p-1)`` for all t.

    For pure powers the linear term never helps as ``t -> infinity``, so the
    answer is ``alpha_max * sup kappa`` for every ``eps >= 0``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if kappa_sup is None:
        if callable(spec.kappa):
            if coords is None:
                raise ValueError("kappa is a function: pass coords or kappa_sup")
            kappa_sup = float(np.max(spec.kappa_values(coords)))
        else:
            kappa_sup = float(spec.kappa)
    return spec.alpha_max * kappa_sup
