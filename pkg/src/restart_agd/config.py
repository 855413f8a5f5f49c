"""Experiment configuration: a flat, JSON round-trippable record."""

import dataclasses
import json
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from . import objectives as O
from .errors import ConfigError
from .iterates import SCHEDULES
from .policies import CLI_NAMES
from .prng import Prng

PROBLEMS = ("quadratic", "huber", "hinder-lubin", "hinder-lubin-mod",
            "scalar-quad", "scalar-huber", "scalar-asym")

# Sizes and constants used in the benchmark experiments.
PROBLEM_DEFAULTS = {
    "quadratic": {"n": 500},
    "huber": {"m": 300, "n": 50, "tau": 0.5},
    "hinder-lubin": {"n": 100, "delta": 1e-4, "alpha": 1e-4},
    "hinder-lubin-mod": {"m": 110, "n": 100, "delta": 1e-4, "alpha": 1e-4, "gamma": 1e-4},
    "scalar-quad": {"c": 1.0, "L": 10.0, "center": 0.0},
    "scalar-huber": {"tau": 0.5, "L": 4.0, "center": 0.0},
    "scalar-asym": {"c": 1.0, "c_right": 9.0, "L": 10.0, "center": 0.0},
}


@dataclass
class ExperimentConfig:
    problem: str = "quadratic"
    n: Optional[int] = None
    m: Optional[int] = None
    tau: Optional[float] = None
    delta: Optional[float] = None
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    c: Optional[float] = None
    c_right: Optional[float] = None
    L: Optional[float] = None
    center: Optional[float] = None
    seed: int = 0
    policy: str = "grad-next"
    schedule: str = "linear"
    gb_resets_schedule: bool = False
    allow_nonseparable: bool = False
    max_iters: int = 5000
    grad_tol: float = 0.0
    # "ones", "zeros", "normal", a number (constant vector) or an explicit list
    x0: Union[str, float, List[float]] = "ones"
    x0_seed: Optional[int] = None
    descent_samples: int = 1000
    csv: Optional[str] = None
    certificate: Optional[str] = None
    svg: Optional[str] = None

    def __post_init__(self):
        if self.problem in PROBLEM_DEFAULTS:
            for key, value in PROBLEM_DEFAULTS[self.problem].items():
                if getattr(self, key) is None:
                    setattr(self, key, value)

    # -- validation ---------------------------------------------------------

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ConfigError("problem", f"must be one of {', '.join(PROBLEMS)}")
        needed = PROBLEM_DEFAULTS[self.problem]
        for key in needed:
            value = getattr(self, key)
            if key in ("n", "m"):
                if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                    raise ConfigError(key, "must be a positive integer")
            elif key == "center":
                _finite(key, value)
            elif key == "alpha":
                if _finite(key, value) < 0:
                    raise ConfigError(key, "must be nonnegative")
            elif _finite(key, value) <= 0:
                raise ConfigError(key, "must be positive")
        if self.problem == "scalar-quad" and self.L < self.c:
            raise ConfigError("L", "must be at least c")
        if self.problem == "scalar-huber" and self.L < 1.0:
            raise ConfigError("L", "must be at least 1 for the scalar Huber problem")
        if self.problem == "scalar-asym" and self.L < max(self.c, self.c_right):
            raise ConfigError("L", "must be at least max(c, c_right)")
        if self.policy not in CLI_NAMES:
            raise ConfigError("policy", f"must be one of {', '.join(CLI_NAMES)}")
        if self.schedule not in SCHEDULES:
            raise ConfigError("schedule", f"must be one of {', '.join(SCHEDULES)}")
        if not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise ConfigError("max_iters", "must be a positive integer")
        if _finite("grad_tol", self.grad_tol) < 0:
            raise ConfigError("grad_tol", "must be nonnegative")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")
        if not isinstance(self.descent_samples, int) or self.descent_samples < 1:
            raise ConfigError("descent_samples", "must be a positive integer")
        if isinstance(self.x0, str):
            if self.x0 not in ("ones", "zeros", "normal"):
                raise ConfigError("x0", "must be ones, zeros, normal, a number or a list")
        elif isinstance(self.x0, list):
            if len(self.x0) != self.dim:
                raise ConfigError("x0", f"needs {self.dim} entries")
            for v in self.x0:
                _finite("x0", v)
        else:
            _finite("x0", self.x0)
        return self

    @property
    def dim(self):
        return 1 if self.problem.startswith("scalar") else self.n

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config", "must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        for key in doc:
            if key not in names:
                raise ConfigError(key, "unknown configuration key")
        return cls(**doc)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc})") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
        return cls.from_json(text)


def _finite(field, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ConfigError(field, "must be a finite number")
    return float(value)


def build_problem(cfg):
    """Instantiate the objective described by ``cfg``."""
    p = cfg.problem
    if p == "quadratic":
        return O.make_quadratic(cfg.n, Prng(cfg.seed))
    if p == "huber":
        return O.make_huber(cfg.m, cfg.n, cfg.tau, Prng(cfg.seed))
    if p == "hinder-lubin":
        return O.make_hinder_lubin(cfg.n, cfg.delta, cfg.alpha)
    if p == "hinder-lubin-mod":
        return O.make_modified_hinder_lubin(cfg.m, cfg.n, cfg.delta, cfg.alpha, cfg.gamma,
                                            Prng(cfg.seed))
    if p == "scalar-quad":
        return O.scaled_quadratic(cfg.c, cfg.L, cfg.center)
    if p == "scalar-huber":
        return O.scalar_huber(cfg.tau, cfg.L, cfg.center)
    if p == "scalar-asym":
        return O.asymmetric_piecewise(cfg.c, cfg.c_right, cfg.L, cfg.center)
    raise ConfigError("problem", f"unknown problem {p!r}")


def build_x0(cfg, dim):
    x0 = cfg.x0
    if x0 == "ones":
        return np.ones(dim)
    if x0 == "zeros":
        return np.zeros(dim)
    if x0 == "normal":
        seed = cfg.seed + 1 if cfg.x0_seed is None else cfg.x0_seed
        return Prng(seed).normal_array(dim)
    if isinstance(x0, list):
        return np.array(x0, dtype=float)
    return np.full(dim, float(x0))
