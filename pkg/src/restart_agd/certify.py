"""Convergence bounds for restarted AGD and checkers that hold a trace to them.

Each checker returns one or more ``CheckResult`` objects. A margin is
``bound + tol - observed`` (or the analogous slack), so a check passes iff
its worst margin is nonnegative.
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DomainError, PreconditionError

BASE_TOL = 1e-9
ZBOUND_TOL = 1e-10
BAND = 1e-12


# --------------------------------------------------------------------------
# Bound formulas
#
# All three bounds are written as (power of 4) * c / (integer)^2 with
# c = 2 L d0^2. Integer denominators are formed exactly before a single
# conversion to float, so the dominance chain between the bounds survives
# rounding.


def _scale(L, d0):
    if not L > 0:
        raise DomainError("L must be positive")
    if d0 < 0:
        raise DomainError("d0 must be nonnegative")
    return 2.0 * L * d0 * d0


def classical_bound(L, d0, k):
    """``2 L d0^2 / (k + 1)^2``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return _scale(L, d0) / float((k + 1) ** 2)


def single_restart_bound(L, d0, r, k):
    """``8 L d0^2 / ((k - r)(r + 2))^2``, valid for ``k >= r + 3`` after one restart at ``r``."""
    if r < 2:
        raise DomainError("the first gradient restart cannot happen before iteration 2")
    if k < r + 3:
        raise DomainError("the single-restart bound starts at k = r + 3")
    return 4.0 * _scale(L, d0) / float(((k - r) * (r + 2)) ** 2)


def _chain_denominator(restarts, k):
    den = (k - restarts[-1]) * (restarts[0] + 2)
    for a, b in zip(restarts[:-1], restarts[1:]):
        den *= b - a + 2
    return den


def multi_restart_bound(L, d0, restarts, k):
    """Bound after ``p >= 2`` restarts ``r_1 < ... < r_p``, for ``k >= r_p + 2``.

    Equals ``(2^(p+1) / ((k - r_p)(r_p - r_{p-1} + 2)...(r_2 - r_1 + 2)(r_1 + 2)))^2 * L d0^2 / 2``.
    """
    restarts = [int(r) for r in restarts]
    p = len(restarts)
    if p < 2:
        raise DomainError("need at least two restarts; use single_restart_bound")
    if restarts[0] < 2:
        raise DomainError("the first gradient restart cannot happen before iteration 2")
    if any(b <= a for a, b in zip(restarts[:-1], restarts[1:])):
        raise DomainError("restart iterations must be strictly increasing")
    if k < restarts[-1] + 2:
        raise DomainError("the multi-restart bound starts at k = r_p + 2")
    return float(4 ** p) * _scale(L, d0) / float(_chain_denominator(restarts, k) ** 2)


def restart_aware_bound(L, d0, restarts, k):
    """The sharpest restart-aware bound available at ``k``, or None.

    ``None`` for ``k <= r_1 + 2``, where only the classical bound applies.
    """
    if not restarts or k < restarts[0] + 3:
        return None
    p = sum(1 for r in restarts if r + 2 <= k)
    if p == 1:
        return single_restart_bound(L, d0, restarts[0], k)
    return multi_restart_bound(L, d0, restarts[:p], k)


@dataclass
class BoundPoint:
    k: int
    classical: float
    restart_aware: Optional[float]


def bound_series(L, d0, restarts, ks):
    return [BoundPoint(k, classical_bound(L, d0, k), restart_aware_bound(L, d0, restarts, k))
            for k in ks]


# --------------------------------------------------------------------------
# Reports


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_margin: Optional[float]
    worst_iteration: Optional[int]
    skipped: bool = False
    checked: int = 0

    def to_dict(self):
        return {"name": self.name, "pass": self.passed, "worst_margin": self.worst_margin,
                "worst_iteration": self.worst_iteration, "skipped": self.skipped,
                "checked": self.checked}


@dataclass
class CertificateReport:
    checks: List[CheckResult]
    meta: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        doc = dict(self.meta)
        doc["checks"] = [c.to_dict() for c in self.checks]
        doc["overall_pass"] = self.overall_pass
        if self.diagnostics:
            doc["diagnostics"] = self.diagnostics
        return doc

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


class _Worst:
    """Running minimum of margins for one named check."""

    def __init__(self, name):
        self.name = name
        self.margin = None
        self.iteration = None
        self.count = 0

    def add(self, margin, k):
        margin = float(margin)
        self.count += 1
        if self.margin is None or margin < self.margin:
            self.margin, self.iteration = margin, int(k)

    def result(self):
        if self.count == 0:
            return CheckResult(self.name, True, None, None, skipped=True)
        return CheckResult(self.name, self.margin >= 0.0, self.margin, self.iteration,
                           checked=self.count)


def skipped(name):
    return CheckResult(name, True, None, None, skipped=True)


# --------------------------------------------------------------------------
# Trace checks


def _require_minimizer(trace):
    if trace.x_star is None or trace.f_star is None:
        raise PreconditionError("trace has no known minimizer")


def tolerance(trace, obj=None):
    """``1e-9 (1 + |f*| + L d0^2)``, widened when ``x*`` came from a reference run."""
    d0 = trace.d0
    tol = BASE_TOL * (1.0 + abs(trace.f_star) + trace.lipschitz * d0 * d0)
    if obj is not None and obj.minimizer_is_numerical:
        tol += 1e-8 + obj.minimizer_residual * max(1.0, d0)
    return tol


def _is_gradient_keep_next(trace):
    return trace.policy == "grad-next" or (trace.policy == "coord" and trace.dim == 1)


def check_classical(trace, obj=None, scale=1.0):
    """``gap(k) <= 2 L d0^2 / (k + 1)^2`` for every recorded ``k``."""
    _require_minimizer(trace)
    tol = tolerance(trace, obj)
    worst = _Worst("classical_bound")
    L, d0 = trace.lipschitz, trace.d0
    for rec in trace.records:
        worst.add(scale * classical_bound(L, d0, rec.k) + tol - rec.gap, rec.k)
    return worst.result()


def check_bounds(trace, obj=None, scale=1.0):
    """Classical bound everywhere plus the restart-aware bounds on their windows.

    The restart-aware check covers ``k >= r_1 + 3``: the single-restart bound
    up to ``r_2 + 1`` and the ``p``-restart bound on ``r_p + 2 .. r_{p+1} + 1``.
    It only applies to one-dimensional keep-next runs on the linear
    schedule. ``scale`` multiplies every bound (used to test the checker).
    Also returns the one-step descent check ``f(x_{r+2}) <= f(x_{r+1})``.
    """
    _require_minimizer(trace)
    if trace.policy == "none":
        return [check_classical(trace, obj, scale), skipped("restart_bound"),
                skipped("descent_after_restart")]
    if not _is_gradient_keep_next(trace):
        raise PreconditionError(f"restart bounds need a grad-next trace, got {trace.policy!r}")
    if trace.schedule != "linear":
        raise PreconditionError("restart bounds assume the linear schedule")
    classical = check_classical(trace, obj, scale)
    tol = tolerance(trace, obj)
    restarts = trace.restart_iterations
    L, d0 = trace.lipschitz, trace.d0
    aware = _Worst("restart_bound")
    if trace.dim == 1 and restarts and restarts[0] < 2:
        # impossible for a correct run; the bound formulas are undefined here
        aware.add(restarts[0] - 2, restarts[0])
    elif trace.dim == 1:
        for rec in trace.records:
            b = restart_aware_bound(L, d0, restarts, rec.k)
            if b is not None:
                aware.add(scale * b + tol - rec.gap, rec.k)
    descent = _Worst("descent_after_restart")
    recs = trace.records
    for r in restarts:
        if r + 2 < len(recs):
            descent.add(recs[r + 1].f_value - recs[r + 2].f_value + tol, r + 2)
    return [classical, aware.result(), descent.result()]


def _one_dim(trace):
    if trace.dim != 1:
        raise PreconditionError("this check is defined for one-dimensional runs")
    _require_minimizer(trace)
    if any(r.x_snapshot is None for r in trace.records):
        raise PreconditionError("trace is missing iterate snapshots")
    return trace.xs()[:, 0], float(trace.x_star[0])


def check_potential_monotonicity(trace, obj=None):
    """``t_k^2 d_{k+1} + L/2 (z_{k+1} - x*)^2 <= t_{k-1}^2 d_k + L/2 (z_k - x*)^2``.

    Checked at every ``k`` whose ``y_k`` came from a classical
    extrapolation, i.e. no restart fired at ``k - 1``.
    """
    if trace.policy not in ("none", "grad-next", "coord"):
        raise PreconditionError(f"monotonicity is not tracked for {trace.policy!r}")
    x, xs = _one_dim(trace)
    recs = trace.records
    L = trace.lipschitz
    tol = tolerance(trace, obj)
    worst = _Worst("potential_monotonicity")
    for k in range(1, len(recs) - 1):
        if recs[k - 1].restarted:
            continue
        t_prev, t_k = recs[k - 1].t, recs[k].t
        z_k = (1.0 - t_prev) * x[k - 1] + t_prev * x[k]
        z_next = (1.0 - t_k) * x[k] + t_k * x[k + 1]
        lhs = t_k * t_k * recs[k + 1].gap + 0.5 * L * (z_next - xs) ** 2
        rhs = t_prev * t_prev * recs[k].gap + 0.5 * L * (z_k - xs) ** 2
        worst.add(rhs - lhs + tol, k)
    return worst.result()


def check_bracketing_ordering_zbound(trace, obj=None):
    """The three one-dimensional restart facts for keep-next gradient restarts.

    * bracketing: a restart fires at ``k`` exactly when ``x_k`` and ``x_{k+1}``
      lie strictly on opposite sides of ``x*``;
    * ordering: between restarts the iterates move monotonically toward ``x*``;
    * z-bound: at a restart, ``|z_{k+1} - x*| >= t_k |x_{k+1} - x*|``.

    Points within ``1e-12 (1 + |x*|)`` of ``x*`` are treated as undecided.
    """
    if not _is_gradient_keep_next(trace):
        raise PreconditionError(f"bracketing is specific to grad-next, got {trace.policy!r}")
    x, xs = _one_dim(trace)
    recs = trace.records
    band = BAND * (1.0 + abs(xs))
    last = len(recs) - 1
    fired = [r.restarted for r in recs]

    bracket = _Worst("bracketing")
    for k in range(last):
        a, b = x[k] - xs, x[k + 1] - xs
        if abs(a) <= band or abs(b) <= band:
            continue
        crossing = (a < 0.0) != (b < 0.0)
        size = min(abs(a), abs(b))
        bracket.add(size if crossing == fired[k] else -size, k)

    order = _Worst("ordering")
    start = 0
    while start < last:
        end = start
        while end < last and not fired[end]:
            end += 1
        # iterates start..end form one segment; x_{end+1} is past the restart
        side = x[start] - xs
        if abs(side) > band:
            direction = 1.0 if side < 0 else -1.0
            for k in range(start, end):
                order.add(direction * (x[k + 1] - x[k]) + band, k)
        start = end + 1

    zb = _Worst("z_bound")
    for k in trace.restart_iterations:
        if k + 1 > last:
            continue
        t_k = recs[k].t
        z = (1.0 - t_k) * x[k] + t_k * x[k + 1]
        zb.add(abs(z - xs) - t_k * abs(x[k + 1] - xs) + ZBOUND_TOL, k)
    return [bracket.result(), order.result(), zb.result()]


def check_descent_lemma(obj, prng, samples=1000):
    """``f(x) - f(T y) >= L/2 |x - T y|^2 - L/2 |x - y|^2`` on random pairs.

    Pairs are drawn as ``10 * N(0, I)``.
    """
    if samples < 1:
        raise DomainError("samples must be positive")
    L = obj.lipschitz
    worst = _Worst("descent_lemma")
    for i in range(samples):
        x = 10.0 * prng.normal_array(obj.dim)
        y = 10.0 * prng.normal_array(obj.dim)
        ty = y - obj.gradient(y) / L
        fx = obj.value(x)
        lhs = fx - obj.value(ty)
        rhs = 0.5 * L * float(np.sum((x - ty) ** 2)) - 0.5 * L * float(np.sum((x - y) ** 2))
        worst.add(lhs - rhs + BASE_TOL * (1.0 + abs(fx)), i)
    return worst.result()


def zbound_diagnostic(trace):
    """How often ``t_k |x_{k+1} - x*| <= |z_{k+1} - x*|`` held at restarts.

    Reported for multi-dimensional runs with stored iterates; never asserted.
    """
    if trace.x_star is None or any(r.x_snapshot is None for r in trace.records):
        return None
    hits = total = 0
    recs = trace.records
    for k in trace.restart_iterations:
        if k + 1 >= len(recs) or recs[k].t is None:
            continue
        xk, xn = recs[k].x_snapshot, recs[k + 1].x_snapshot
        t_k = recs[k].t
        z = (1.0 - t_k) * xk + t_k * xn
        total += 1
        hits += t_k * np.linalg.norm(xn - trace.x_star) <= np.linalg.norm(z - trace.x_star)
    return {"restarts": total, "zbound_held": int(hits),
            "fraction": None if total == 0 else hits / total}


def certify_trace(trace, obj=None, prng=None, descent_samples=1000, meta=None):
    """Run every check applicable to ``trace`` and collect a report."""
    checks = []
    diagnostics = {}
    if trace.x_star is not None and trace.f_star is not None:
        if trace.policy == "none" or (_is_gradient_keep_next(trace) and trace.schedule == "linear"):
            checks.extend(check_bounds(trace, obj))
        else:
            checks.append(check_classical(trace, obj))
        if trace.dim == 1:
            if trace.policy in ("none", "grad-next", "coord"):
                checks.append(check_potential_monotonicity(trace, obj))
            if _is_gradient_keep_next(trace):
                checks.extend(check_bracketing_ordering_zbound(trace, obj))
        else:
            diag = zbound_diagnostic(trace)
            if diag is not None:
                diagnostics["zbound_higher_dim"] = diag
    if obj is not None and prng is not None:
        checks.append(check_descent_lemma(obj, prng, descent_samples))
    return CertificateReport(checks, dict(meta or {}), diagnostics)
