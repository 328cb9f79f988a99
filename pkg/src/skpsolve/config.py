"""Run configuration: defaults, a flat ``key = value`` file, environment, flags.

Later sources override earlier ones.  Environment variables use the prefix
``SKP_`` followed by the upper-case key (``SKP_B=0``, ``SKP_OUTPUT_DIR=out``).
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .domain import build_domain
from .energy import Problem
from .exceptions import ConfigurationError, HypothesisViolation
from .nonlinearity import NonlinearitySpec

ENV_PREFIX = "SKP_"
DEFAULT_N = {1: 1023, 2: 63}


@dataclass(frozen=True)
class RunConfig:
    a: float = 1.0
    b: float = 1.0
    p: float = 5.0
    alpha_plus: float = 1.0
    alpha_minus: float = 1.0
    dim: int = 1
    n: Optional[int] = None
    m: int = 32
    tol: float = 1e-9
    max_iter: int = 50_000
    path_nodes: int = 33
    seed: int = 42
    R: float = 0.0
    output_dir: str = "skp_output"

    @property
    def grid_points(self):
        return DEFAULT_N.get(self.dim, 1023) if self.n is None else self.n

    def validate(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        if self.grid_points < 3:
            raise ConfigurationError(f"n must be at least 3, got {self.grid_points}")
        if not self.a > 0:
            raise HypothesisViolation(f"need a > 0, got a={self.a}")
        if not self.b >= 0:
            raise HypothesisViolation(f"need b >= 0, got b={self.b}")
        if not (self.alpha_plus > 0 and self.alpha_minus > 0):
            raise HypothesisViolation("alpha_plus and alpha_minus must be positive")
        NonlinearitySpec(p=self.p, alpha_plus=self.alpha_plus, alpha_minus=self.alpha_minus)
        if self.m < 2:
            raise ConfigurationError(f"m must be at least 2, got {self.m}")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 0:
            raise ConfigurationError(f"max_iter must be nonnegative, got {self.max_iter}")
        if self.path_nodes < 3:
            raise ConfigurationError(f"path_nodes must be at least 3, got {self.path_nodes}")
        if self.R < 0:
            raise ConfigurationError(f"R must be >= 0 (0 selects it automatically), got {self.R}")
        return self

    def canonical(self):
        """Plain dict of every field with ``n`` resolved."""
        d = asdict(self)
        d["n"] = self.grid_points
        return d

    def problem(self):
        self.validate()
        spec = NonlinearitySpec(p=self.p, alpha_plus=self.alpha_plus, alpha_minus=self.alpha_minus)
        return Problem(build_domain(self.dim, self.grid_points), spec, a=self.a, b=self.b)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_CASTS = {"a": float, "b": float, "p": float, "alpha_plus": float, "alpha_minus": float,
          "dim": int, "n": int, "m": int, "tol": float, "max_iter": int, "path_nodes": int,
          "seed": int, "R": float, "output_dir": str}
_ALIASES = {"output": "output_dir", "r": "R"}


def _key(raw):
    key = raw.strip()
    key = _ALIASES.get(key, key)
    if key not in _FIELDS:
        lowered = key.lower()
        key = _ALIASES.get(lowered, lowered)
    if key not in _FIELDS:
        raise ConfigurationError(f"unknown configuration key {raw.strip()!r}")
    return key


def _cast(key, value):
    cast = _CASTS[key]
    try:
        if cast is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"bad value for {key}: {value!r}") from None


def parse_config_text(text):
    """``key = value`` lines; ``#`` starts a comment; blank lines are ignored."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        raw, value = line.split("=", 1)
        key = _key(raw)
        values[key] = _cast(key, value.strip())
    return values


def env_overrides(environ=None):
    environ = os.environ if environ is None else environ
    values = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX):
            key = _key(name[len(ENV_PREFIX):])
            values[key] = _cast(key, value)
    return values


def load_config(path=None, overrides=None, environ=None):
    """Merge defaults, ``path``, ``SKP_*`` variables and ``overrides`` (in that order)."""
    cfg = RunConfig()
    layers = []
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                layers.append(parse_config_text(fh.read()))
        except OSError as err:
            raise ConfigurationError(f"cannot read config file {path}: {err}") from None
    layers.append(env_overrides(environ))
    layers.append({_key(k): _cast(_key(k), v) for k, v in (overrides or {}).items()
                   if v is not None})
    for layer in layers:
        cfg = replace(cfg, **layer)
    return cfg.validate()
