"""Momentum schedules, solver state and run traces."""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ArgumentError, NumericError

SCHEDULES = ("linear", "recursive")


@dataclass
class MomentumSchedule:
    """The ``t_k`` sequence, counted from the last reset.

    ``linear`` gives ``t_k = (k + 2) / 2`` for ``k >= 1``; ``recursive``
    gives ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``. Both start at ``t_0 = 1``.
    """

    variant: str = "linear"
    index: int = 0
    t: float = 1.0

    def __post_init__(self):
        if self.variant not in SCHEDULES:
            raise ArgumentError(f"unknown schedule {self.variant!r}")

    def advance(self):
        self.index += 1
        if self.variant == "linear":
            self.t = (self.index + 2) / 2
        else:
            self.t = (1.0 + math.sqrt(1.0 + 4.0 * self.t * self.t)) / 2
        return self.t

    def reset(self):
        self.index = 0
        self.t = 1.0

    def copy(self):
        return MomentumSchedule(self.variant, self.index, self.t)


def next_t(schedule):
    """Advance ``schedule`` by one index and return the new ``t``."""
    return schedule.advance()


def t_step(obj, y, g=None):
    """Gradient step ``T(y) = y - grad f(y) / L``.

    ``g`` may carry a precomputed gradient at ``y``.
    """
    if g is None:
        g = obj.gradient(y)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient")
    return y - g / obj.lipschitz


def momentum_coefficient(t_k, t_next):
    return (t_k - 1.0) / t_next


@dataclass
class SolverState:
    """Live AGD iterates at iteration ``k``.

    ``y_prev`` is kept for the Giselsson-Boyd test, which looks one
    extrapolated point back.
    """

    k: int
    x_prev: np.ndarray
    x_curr: np.ndarray
    y_curr: np.ndarray
    schedule: MomentumSchedule
    steps_since_restart: int = 0
    y_prev: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, x0, variant="linear"):
        x0 = np.array(x0, dtype=float)
        return cls(0, x0.copy(), x0.copy(), x0.copy(), MomentumSchedule(variant))

    def copy(self):
        return SolverState(self.k, self.x_prev.copy(), self.x_curr.copy(),
                           self.y_curr.copy(), self.schedule.copy(),
                           self.steps_since_restart,
                           None if self.y_prev is None else self.y_prev.copy())


@dataclass
class IterRecord:
    """What happened at iteration ``k``.

    ``t`` is the schedule value ``t_k`` in force at this iteration and
    ``restarted`` says whether the restart test fired when ``x_{k+1}`` was
    produced. With keep-previous semantics the rejected candidate's value
    lands in ``discarded_f``.
    """

    k: int
    f_value: float
    gap: Optional[float]
    grad_norm_y: float
    restarted: bool
    t: Optional[float]
    x_snapshot: Optional[np.ndarray] = None
    discarded_f: Optional[float] = None


@dataclass
class RunTrace:
    policy: str
    schedule: str
    lipschitz: float
    x0: np.ndarray
    x_star: Optional[np.ndarray]
    f_star: Optional[float]
    records: List[IterRecord] = field(default_factory=list)
    restart_iterations: List[int] = field(default_factory=list)
    coord_restarts: Optional[List[List[int]]] = None
    termination: str = "max_iters"
    grad_evals: int = 0
    f_evals: int = 0
    x_final: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.records)

    @property
    def dim(self):
        return self.x0.shape[0]

    @property
    def d0(self):
        if self.x_star is None:
            return None
        return float(np.linalg.norm(self.x0 - self.x_star))

    def gaps(self):
        return np.array([np.nan if r.gap is None else r.gap for r in self.records])

    def f_values(self):
        return np.array([r.f_value for r in self.records])

    def xs(self):
        """Stacked iterate snapshots, shape ``(len, dim)``."""
        if any(r.x_snapshot is None for r in self.records):
            raise ArgumentError("trace does not carry iterate snapshots")
        return np.array([r.x_snapshot for r in self.records])

    def iterations_to_gap(self, target):
        """First ``k`` with ``gap <= target``, or None."""
        for r in self.records:
            if r.gap is not None and r.gap <= target:
                return r.k
        return None


class TraceBuilder:
    """Accumulates records for a run; shared by both solver drivers."""

    def __init__(self, obj, x0, policy, schedule, store_iterates):
        self.obj = obj
        self.store = store_iterates or obj.dim == 1
        self.trace = RunTrace(policy, schedule, obj.lipschitz, np.array(x0, dtype=float),
                              obj.known_minimizer, obj.known_min_value)

    def record(self, k, x, fx, gy_norm, restarted, t, discarded_f=None):
        f_star = self.trace.f_star
        fx = float(fx)
        gap = None if f_star is None else fx - f_star
        self.trace.records.append(IterRecord(
            k, fx, gap, float(gy_norm), bool(restarted), None if t is None else float(t),
            x.copy() if self.store else None, discarded_f))
        if restarted:
            self.trace.restart_iterations.append(k)

    def finish(self, termination, x):
        self.trace.termination = termination
        self.trace.x_final = x.copy()
        return self.trace
