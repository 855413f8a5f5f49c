"""Restart rules for accelerated gradient descent.

Two things vary between schemes: the test that decides whether to restart
and what a restart does to the iterates. ``keep-prev`` throws the fresh
point away and restarts from ``x_k``; ``keep-next`` keeps ``x_{k+1}`` and
only drops the momentum.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .objectives import _check_point
from .iterates import MomentumSchedule, SolverState, TraceBuilder, momentum_coefficient, t_step

NONE = "None"
FUNCTION_VALUE = "FunctionValue"
GRADIENT_KEEP_PREV = "GradientKeepPrev"
GRADIENT_KEEP_NEXT = "GradientKeepNext"
GISELSSON_BOYD = "GiselssonBoyd"
COORDINATEWISE = "CoordinatewiseKeepNext"

CLI_NAMES = {
    "none": NONE,
    "fval": FUNCTION_VALUE,
    "grad-prev": GRADIENT_KEEP_PREV,
    "grad-next": GRADIENT_KEEP_NEXT,
    "gb": GISELSSON_BOYD,
    "coord": COORDINATEWISE,
}
_KIND_TO_CLI = {v: k for k, v in CLI_NAMES.items()}


@dataclass(frozen=True)
class RestartPolicy:
    kind: str = NONE
    gb_resets_schedule: bool = False
    # The coordinate driver is defined for separable objectives; this opts
    # into using it as a heuristic on coupled ones.
    allow_nonseparable: bool = False

    def __post_init__(self):
        if self.kind not in _KIND_TO_CLI:
            raise ArgumentError(f"unknown restart policy {self.kind!r}")

    @classmethod
    def from_name(cls, name, **kwargs):
        if isinstance(name, RestartPolicy):
            return name
        kind = CLI_NAMES.get(name, name)
        return cls(kind, **kwargs)

    @property
    def name(self):
        return _KIND_TO_CLI[self.kind]

    @property
    def keeps_previous(self):
        return self.kind in (GRADIENT_KEEP_PREV, FUNCTION_VALUE)


def should_restart_function_value(f_next, f_curr):
    return f_next > f_curr


def should_restart_gradient(grad_at_y, x_next, x_curr):
    """``<grad f(y_k), x_{k+1} - x_k> > 0``; a zero product does not restart."""
    return float(np.dot(grad_at_y, np.subtract(x_next, x_curr))) > 0.0


def should_restart_gb(y_prev, x_curr, x_next):
    y_prev = np.asarray(y_prev, dtype=float)
    x_curr = np.asarray(x_curr, dtype=float)
    mid = 0.5 * (x_curr + y_prev)
    return float(np.dot(y_prev - x_curr, np.asarray(x_next) - mid)) > 0.0


def apply_restart_keep_prev(state, x_next):
    """Discard ``x_next``; restart from ``x_k`` with a fresh schedule."""
    sched = state.schedule.copy()
    sched.reset()
    x = state.x_curr
    return SolverState(state.k + 1, x.copy(), x.copy(), x.copy(), sched, 0, state.y_curr)


def apply_restart_keep_next(state, x_next):
    """Keep ``x_next`` and drop the momentum: ``y := x_next``, ``t := 1``."""
    sched = state.schedule.copy()
    sched.reset()
    x_next = np.array(x_next, dtype=float)
    return SolverState(state.k + 1, state.x_curr, x_next, x_next.copy(), sched, 0, state.y_curr)


def apply_restart_gb(state, x_next, reset_schedule=False):
    """Giselsson-Boyd restart: ``y := x_next``; ``t`` keeps counting unless asked."""
    sched = state.schedule.copy()
    if reset_schedule:
        sched.reset()
    else:
        sched.advance()
    x_next = np.array(x_next, dtype=float)
    return SolverState(state.k + 1, state.x_curr, x_next, x_next.copy(), sched, 0, state.y_curr)


def run_coordinatewise(obj, x0, max_iters=1000, grad_tol=0.0, schedule="linear",
                       store_iterates=False, allow_nonseparable=False, coefficient=None):
    """Gradient restarts with keep-next semantics, applied per coordinate.

    Each coordinate carries its own momentum schedule; all are driven by a
    single full gradient evaluation at the assembled ``y_k`` per iteration.
    Coordinate ``i`` restarts when ``g_i (x_{k+1,i} - x_{k,i}) > 0``.
    """
    if not obj.separable and not allow_nonseparable:
        raise ArgumentError("coordinate-wise restarts need a separable objective")
    if max_iters < 1:
        raise ArgumentError("max_iters must be at least 1")
    MomentumSchedule(schedule)  # validates the variant name
    coef_fn = coefficient or momentum_coefficient
    x = _check_point(obj, x0).copy()
    n = obj.dim
    builder = TraceBuilder(obj, x, "coord", schedule, store_iterates)
    coord_restarts = [[] for _ in range(n)]
    idx = np.zeros(n, dtype=np.int64)
    t = np.ones(n)
    y = x.copy()
    fx = obj.value(x)
    k = 0
    while True:
        term = _termination(obj, x, grad_tol)
        if term is not None or k == max_iters:
            gy = obj.gradient(y)
            builder.record(k, x, fx, float(np.linalg.norm(gy)), False, _t_of(t))
            break
        gy = obj.gradient(y)
        builder.trace.grad_evals += 1
        x_next = t_step(obj, y, gy)
        f_next = obj.value(x_next)
        fire = gy * (x_next - x) > 0.0
        t_k = t.copy()
        idx = idx + 1
        if schedule == "linear":
            t = (idx + 2) / 2
        else:
            t = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2
        y_next = x_next + coef_fn(t_k, t) * (x_next - x)
        if fire.any():
            y_next[fire] = x_next[fire]
            idx[fire] = 0
            t[fire] = 1.0
            for i in np.flatnonzero(fire):
                coord_restarts[i].append(k)
        builder.record(k, x, fx, float(np.linalg.norm(gy)), bool(fire.any()), _t_of(t_k))
        x, y, fx = x_next, y_next, f_next
        k += 1
    builder.trace.coord_restarts = coord_restarts
    return builder.finish(term or "max_iters", x)


def _t_of(t):
    return float(t[0]) if t.shape[0] == 1 else None


def _termination(obj, x, grad_tol):
    if obj.dim == 1:
        gx = obj.gradient(x)
        if gx[0] == 0.0:
            return "stationary_exact"
        if grad_tol > 0 and abs(gx[0]) <= grad_tol:
            return "grad_tol"
    elif grad_tol > 0 and np.linalg.norm(obj.gradient(x)) <= grad_tol:
        return "grad_tol"
    return None
