"""The AGD loop.

``run`` computes ``x_{k+1} = T(y_k)``, asks the restart policy whether to
restart and then either extrapolates or applies the policy's restart. Every
iteration is recorded in a ``RunTrace``.
"""

import os

import numpy as np

from . import policies as P
from .errors import ArgumentError
from .iterates import SolverState, TraceBuilder, momentum_coefficient, t_step
from .objectives import _check_point

# Test hook: ``RESTART_AGD_MUTATION=momentum-off-by-one`` shifts the numerator
# of the momentum coefficient by one index. Used to show the certifier bites.
MUTATION_ENV = "RESTART_AGD_MUTATION"


def _mutated_coefficient(t_k, t_next):
    return (t_next - 1.0) / t_next


def coefficient_function():
    if os.environ.get(MUTATION_ENV) == "momentum-off-by-one":
        return _mutated_coefficient
    return momentum_coefficient


def extrapolate(state, x_next, coefficient=momentum_coefficient):
    """Classical update of ``y``: ``x_{k+1} + (t_k - 1)/t_{k+1} (x_{k+1} - x_k)``."""
    sched = state.schedule.copy()
    t_k = sched.t
    t_next = sched.advance()
    y_next = x_next + coefficient(t_k, t_next) * (x_next - state.x_curr)
    return SolverState(state.k + 1, state.x_curr, x_next, y_next, sched,
                       state.steps_since_restart + 1, state.y_curr)


def agd_step(state, obj):
    """One classical AGD step; returns ``(new_state, x_next)``."""
    x_next = t_step(obj, state.y_curr)
    return extrapolate(state, x_next, coefficient_function()), x_next


def run(obj, x0, policy="none", schedule="linear", max_iters=1000, grad_tol=0.0,
        store_iterates=False):
    """Run AGD with the given restart policy.

    Parameters
    ----------
    obj : Objective
    x0 : array_like
        Starting point.
    policy : str or RestartPolicy
        ``none``, ``fval``, ``grad-prev``, ``grad-next``, ``gb`` or ``coord``.
    schedule : {"linear", "recursive"}
    max_iters : int
        Number of iterations; the trace holds ``x_0 .. x_{max_iters}``
        unless it stops early.
    grad_tol : float
        Stop once ``|grad f(x_k)| <= grad_tol``. Zero disables the test. In
        one dimension the run also stops when ``f'(x_k)`` is exactly zero.
    store_iterates : bool
        Keep a copy of every ``x_k`` (always done in one dimension).

    Returns
    -------
    RunTrace
    """
    policy = P.RestartPolicy.from_name(policy)
    coef = coefficient_function()
    if policy.kind == P.COORDINATEWISE:
        return P.run_coordinatewise(obj, x0, max_iters, grad_tol, schedule, store_iterates,
                                    policy.allow_nonseparable, coef)
    if max_iters < 1:
        raise ArgumentError("max_iters must be at least 1")
    x0 = _check_point(obj, x0)
    builder = TraceBuilder(obj, x0, policy.name, schedule, store_iterates)
    trace = builder.trace
    state = SolverState.initial(x0, schedule)
    kind = policy.kind
    fx = obj.value(state.x_curr)
    while True:
        k = state.k
        x = state.x_curr
        t_k = state.schedule.t
        term = P._termination(obj, x, grad_tol)
        if term is not None or k == max_iters:
            gy = obj.gradient(state.y_curr)
            builder.record(k, x, fx, float(np.linalg.norm(gy)), False, t_k)
            break
        gy = obj.gradient(state.y_curr)
        trace.grad_evals += 1
        x_next = t_step(obj, state.y_curr, gy)
        f_next = obj.value(x_next)
        if kind == P.NONE:
            fire = False
        elif kind == P.FUNCTION_VALUE:
            trace.f_evals += 1
            fire = P.should_restart_function_value(f_next, fx)
        elif kind == P.GISELSSON_BOYD:
            fire = state.y_prev is not None and P.should_restart_gb(state.y_prev, x, x_next)
        else:
            fire = P.should_restart_gradient(gy, x_next, x)
        discarded = None
        if not fire:
            state = extrapolate(state, x_next, coef)
        elif policy.keeps_previous:
            state = P.apply_restart_keep_prev(state, x_next)
            discarded, f_next = f_next, fx
        elif kind == P.GISELSSON_BOYD:
            state = P.apply_restart_gb(state, x_next, policy.gb_resets_schedule)
        else:
            state = P.apply_restart_keep_next(state, x_next)
        builder.record(k, x, fx, float(np.linalg.norm(gy)), fire, t_k, discarded)
        fx = f_next
    return builder.finish(term or "max_iters", state.x_curr)
