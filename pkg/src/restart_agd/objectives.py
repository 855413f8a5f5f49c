"""Convex L-smooth test objectives.

Every objective exposes ``value``/``gradient`` plus the metadata the solver
and the certifier need: the Lipschitz constant of the gradient, a
separability flag and, when available, a minimizer and the optimal value.
"""

import math

import numpy as np
import scipy.linalg

from .errors import ArgumentError, GenerationError
from .prng import Prng


class Objective:
    """Base class for a convex function with Lipschitz gradient.

    Attributes
    ----------
    dim : int
        Number of variables.
    lipschitz : float
        A valid Lipschitz constant ``L`` of the gradient.
    separable : bool
        True when ``f(x) = sum_i f_i(x_i)``.
    known_minimizer : ndarray or None
        A point of ``Argmin f``.
    known_min_value : float or None
        ``f*``.
    minimizer_residual : float
        Gradient norm at ``known_minimizer``; zero for closed-form minimizers,
        positive when the minimizer came from a reference run.
    """

    kind = "objective"

    def __init__(self, dim, lipschitz, separable=False, known_minimizer=None,
                 known_min_value=None, minimizer_residual=0.0):
        if dim < 1:
            raise ArgumentError("dim must be positive")
        if not lipschitz > 0:
            raise ArgumentError("lipschitz must be positive")
        self.dim = int(dim)
        self.lipschitz = float(lipschitz)
        self.separable = bool(separable)
        self.known_minimizer = None
        self.known_min_value = None
        self.minimizer_residual = float(minimizer_residual)
        if known_minimizer is not None:
            self._set_minimizer(known_minimizer, known_min_value, minimizer_residual)

    def _set_minimizer(self, x_star, f_star=None, residual=0.0):
        x_star = np.array(x_star, dtype=float).reshape(self.dim)
        x_star.setflags(write=False)
        self.known_minimizer = x_star
        self.known_min_value = float(self.value(x_star) if f_star is None else f_star)
        self.minimizer_residual = float(residual)

    @property
    def minimizer_is_numerical(self):
        return self.minimizer_residual > 0.0

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def params(self):
        """JSON-ready description of the problem (see ``to_dict``)."""
        return {"type": self.kind, "dim": self.dim}

    def to_dict(self, include_matrices=False):
        doc = self.params()
        if include_matrices:
            doc.update(self._matrices())
        return doc

    def _matrices(self):
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items() if k != "type")
        return f"{type(self).__name__}({args})"


def _check_point(obj, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape != (obj.dim,):
        raise ArgumentError(f"expected a vector of length {obj.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("point has non-finite entries")
    return x


def evaluate(obj, x):
    """``f(x)`` with shape and finiteness validation."""
    return float(obj.value(_check_point(obj, x)))


def grad(obj, x):
    """``grad f(x)`` with shape and finiteness validation."""
    return np.asarray(obj.gradient(_check_point(obj, x)), dtype=float)


def grad_check(obj, x, h=1e-6):
    """Worst relative error between ``grad`` and central differences.

    The step for coordinate ``i`` is ``h * (1 + |x_i|)``; the error is
    normalised by ``max(1, |g_i|)`` so that tiny derivatives are compared
    absolutely.
    """
    if not h > 0:
        raise ArgumentError("h must be positive")
    x = _check_point(obj, x)
    g = obj.gradient(x)
    worst = 0.0
    for i in range(obj.dim):
        step = h * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        fd = (obj.value(xp) - obj.value(xm)) / (xp[i] - xm[i])
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst


def power_iteration(matvec, dim, rtol=1e-12, max_iter=100_000):
    """Largest eigenvalue of a symmetric positive semidefinite operator.

    Stops once the Rayleigh quotient has settled to ``rtol`` and the
    eigen-residual is below ``rtol**(2/3)`` (relative); the eigenvalue
    error is then of order ``residual**2 / gap``, well under ``rtol`` even
    when the top of the spectrum is clustered.
    """
    v = np.ones(dim) / math.sqrt(dim)
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        lam_new = float(v @ w)
        if lam_new == 0.0:
            return 0.0
        resid = np.linalg.norm(w - lam_new * v)
        if abs(lam_new - lam) <= rtol * lam_new and resid <= rtol ** (2 / 3) * lam_new:
            return lam_new
        v = w / np.linalg.norm(w)
        lam = lam_new
    return lam


def _reference_minimize(obj, x0, gtol=1e-12, max_iter=1_000_000):
    """Gradient-restarted AGD run used only to pin down ``x*`` numerically."""
    L = obj.lipschitz
    x = np.array(x0, dtype=float)
    y = x.copy()
    j = 0
    g = obj.gradient(x)
    for _ in range(max_iter):
        gy = obj.gradient(y)
        x_new = y - gy / L
        if gy @ (x_new - x) > 0:
            y = x_new
            j = 0
        else:
            y = x_new + ((j + 2) / 2 - 1) / ((j + 3) / 2) * (x_new - x)
            j += 1
        x = x_new
        g = obj.gradient(x)
        if np.linalg.norm(g) <= gtol:
            break
    return x, float(np.linalg.norm(g))


# --------------------------------------------------------------------------
# Random quadratic


class QuadraticProblem(Objective):
    """``f(x) = x'Qx/2 - q'x`` with ``Q`` symmetric positive definite."""

    kind = "quadratic"

    def __init__(self, Q, q, seed=None, lipschitz=None):
        Q = np.array(Q, dtype=float, ndmin=2)
        q = np.array(q, dtype=float).reshape(-1)
        n = q.shape[0]
        if Q.shape != (n, n):
            raise ArgumentError("Q must be square and match q")
        if not np.array_equal(Q, Q.T):
            raise ArgumentError("Q must be symmetric")
        try:
            chol = scipy.linalg.cho_factor(Q)
        except np.linalg.LinAlgError as exc:
            raise GenerationError("Q is not positive definite") from exc
        lam = power_iteration(lambda v: Q @ v, n) if lipschitz is None else lipschitz
        diag = np.count_nonzero(Q - np.diag(np.diag(Q))) == 0
        self.Q, self.q, self.seed = Q, q, seed
        Q.setflags(write=False)
        q.setflags(write=False)
        super().__init__(n, lam, separable=diag)
        self._set_minimizer(scipy.linalg.cho_solve(chol, q))

    def value(self, x):
        return 0.5 * (x @ (self.Q @ x)) - self.q @ x

    def gradient(self, x):
        return self.Q @ x - self.q

    def params(self):
        return {"type": self.kind, "n": self.dim, "seed": self.seed}

    def _matrices(self):
        return {"Q": self.Q.ravel().tolist(), "q": self.q.tolist()}


def make_quadratic(n, prng):
    """``Q = Q0 + Q0' + 50 I`` with uniform ``Q0`` and standard normal ``q``."""
    if n < 1:
        raise ArgumentError("n must be at least 1")
    seed = prng.state
    Q0 = prng.uniform_array(n * n).reshape(n, n)
    q = prng.normal_array(n)
    return QuadraticProblem(Q0 + Q0.T + 50.0 * np.eye(n), q, seed=seed)


# --------------------------------------------------------------------------
# Huber regression


def huber(z, tau):
    """Elementwise Huber penalty: ``z**2`` inside ``[-tau, tau]``, linear outside."""
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    return np.where(a <= tau, z * z, 2.0 * tau * a - tau * tau)


class HuberProblem(Objective):
    """``f(x) = (1/2) sum_i huber(a_i x - y_i)``.

    The minimizer has no closed form; it is found by a reference run at
    construction and flagged through ``minimizer_residual``.
    """

    kind = "huber"

    def __init__(self, A, y, tau, seed=None, solve_minimizer=True):
        A = np.array(A, dtype=float, ndmin=2)
        y = np.array(y, dtype=float).reshape(-1)
        if A.shape[0] != y.shape[0]:
            raise ArgumentError("A and y disagree on the number of rows")
        if not tau > 0:
            raise ArgumentError("tau must be positive")
        self.A, self.y, self.tau, self.seed = A, y, float(tau), seed
        A.setflags(write=False)
        y.setflags(write=False)
        lam = power_iteration(lambda v: A.T @ (A @ v), A.shape[1])
        super().__init__(A.shape[1], lam, separable=A.shape[1] == 1)
        if solve_minimizer:
            x_ls = np.linalg.lstsq(A, y, rcond=None)[0]
            x_star, res = _reference_minimize(self, x_ls)
            self._set_minimizer(x_star, residual=max(res, np.finfo(float).tiny))

    def value(self, x):
        return 0.5 * float(np.sum(huber(self.A @ x - self.y, self.tau)))

    def gradient(self, x):
        r = self.A @ x - self.y
        return self.A.T @ np.clip(r, -self.tau, self.tau)

    def params(self):
        m, n = self.A.shape
        return {"type": self.kind, "m": m, "n": n, "tau": self.tau, "seed": self.seed}

    def _matrices(self):
        return {"A": self.A.ravel().tolist(), "y": self.y.tolist()}


def make_huber(m, n, tau, prng):
    """Huber regression with standard normal ``A`` (row-major) then ``y``."""
    if m < 1 or n < 1:
        raise ArgumentError("m and n must be at least 1")
    if not tau > 0:
        raise ArgumentError("tau must be positive")
    seed = prng.state
    A = prng.normal_array(m * n).reshape(m, n)
    y = prng.normal_array(m)
    return HuberProblem(A, y, tau, seed=seed)


# --------------------------------------------------------------------------
# Hinder-Lubin family


def hl_piece(z, delta):
    """The Hinder-Lubin building block: ``z**2/2`` right of ``-delta``, linear left."""
    z = np.asarray(z, dtype=float)
    return np.where(z >= -delta, 0.5 * z * z, -delta * z - 0.5 * delta * delta)


def hl_piece_deriv(z, delta):
    z = np.asarray(z, dtype=float)
    return np.where(z >= -delta, z, -delta)


def _soft_plus_sqrt(t):
    # t + sqrt(t^2 + 1) without cancellation for t << 0
    s = np.sqrt(t * t + 1.0)
    return np.where(t >= 0, t + s, 1.0 / (s - t))


class HinderLubinProblem(Objective):
    """``sum_i i*h(x_i) + alpha/2 |x|^2``, optionally plus the coupling term
    ``gamma * sum_j (<a_j, x> + sqrt(<a_j, x>^2 + 1))``.

    The coupling term makes the problem non-separable and moves the
    minimizer away from zero; in that case ``x*`` is computed numerically.
    """

    kind = "hinder-lubin"

    def __init__(self, n, delta, alpha, A=None, gamma=None, seed=None):
        if n < 1:
            raise ArgumentError("n must be at least 1")
        if not delta > 0:
            raise ArgumentError("delta must be positive")
        if alpha < 0:
            raise ArgumentError("alpha must be nonnegative")
        self.n, self.delta, self.alpha, self.seed = int(n), float(delta), float(alpha), seed
        self.weights = np.arange(1, n + 1, dtype=float)
        self.A = None
        self.gamma = None
        L = n + alpha
        if A is not None:
            A = np.array(A, dtype=float, ndmin=2)
            if A.shape[1] != n:
                raise ArgumentError("modifier matrix must have n columns")
            if gamma is None or not gamma > 0:
                raise ArgumentError("gamma must be positive")
            A.setflags(write=False)
            self.A, self.gamma = A, float(gamma)
            # (t + sqrt(t^2+1))'' = (t^2+1)^(-3/2) <= 1
            L += self.gamma * float(np.sum(A * A))
        super().__init__(n, L, separable=A is None)
        if A is None:
            self._set_minimizer(np.zeros(n), 0.0)
        else:
            x_star, res = _reference_minimize(self, np.zeros(n))
            self._set_minimizer(x_star, residual=max(res, np.finfo(float).tiny))

    @property
    def modified(self):
        return self.A is not None

    def value(self, x):
        v = float(self.weights @ hl_piece(x, self.delta)) + 0.5 * self.alpha * float(x @ x)
        if self.A is not None:
            v += self.gamma * float(np.sum(_soft_plus_sqrt(self.A @ x)))
        return v

    def gradient(self, x):
        g = self.weights * hl_piece_deriv(x, self.delta) + self.alpha * x
        if self.A is not None:
            t = self.A @ x
            g = g + self.gamma * (self.A.T @ (_soft_plus_sqrt(t) / np.sqrt(t * t + 1.0)))
        return g

    def params(self):
        doc = {"type": self.kind, "n": self.n, "delta": self.delta, "alpha": self.alpha}
        if self.A is not None:
            doc.update(m=self.A.shape[0], gamma=self.gamma, seed=self.seed)
        return doc

    def _matrices(self):
        return {} if self.A is None else {"A": self.A.ravel().tolist()}


def make_hinder_lubin(n, delta, alpha, modifier=None):
    """Hinder-Lubin function; ``modifier`` is ``{"A": matrix, "gamma": value}``."""
    if modifier is None:
        return HinderLubinProblem(n, delta, alpha)
    return HinderLubinProblem(n, delta, alpha, A=modifier["A"], gamma=modifier["gamma"],
                              seed=modifier.get("seed"))


def make_modified_hinder_lubin(m, n, delta, alpha, gamma, prng):
    """Modified Hinder-Lubin with a standard normal ``m x n`` coupling matrix."""
    if m < 1:
        raise ArgumentError("m must be at least 1")
    seed = prng.state
    A = prng.normal_array(m * n).reshape(m, n)
    return make_hinder_lubin(n, delta, alpha, {"A": A, "gamma": gamma, "seed": seed})


# --------------------------------------------------------------------------
# One-dimensional instances

SCALAR_KINDS = ("scaled-quadratic", "scalar-huber", "asymmetric-piecewise")


class ScalarProblem(Objective):
    """Desk-scale one-dimensional convex functions with an exact minimizer.

    ``scaled-quadratic``      params ``(c, L[, center])``: ``c (x - center)^2 / 2``
    ``scalar-huber``          params ``(tau, L[, center])``: ``huber(x - center) / 2``
    ``asymmetric-piecewise``  params ``(c_left, c_right, L[, center])``

    ``L`` is the declared Lipschitz constant and may exceed the true
    curvature; that is what makes the momentum overshoot and restarts fire.
    """

    kind = "scalar"

    def __init__(self, kind, params):
        params = tuple(float(p) for p in params)
        if kind == "scaled-quadratic":
            c, L, center = _pad(params, 2, 3)
            curv = (c, c)
        elif kind == "scalar-huber":
            tau, L, center = _pad(params, 2, 3)
            if not tau > 0:
                raise ArgumentError("tau must be positive")
            curv = (1.0, 1.0)
        elif kind == "asymmetric-piecewise":
            cl, cr, L, center = _pad(params, 3, 4)
            curv = (cl, cr)
        else:
            raise ArgumentError(f"unknown scalar problem kind {kind!r}")
        if min(curv) <= 0:
            raise ArgumentError("curvatures must be positive")
        if L < max(curv):
            raise ArgumentError("declared L is below the true curvature")
        self.scalar_kind = kind
        self.scalar_params = params
        self.center = center
        self._curv = curv
        self._tau = params[0] if kind == "scalar-huber" else None
        super().__init__(1, L, separable=True)
        self._set_minimizer([center], 0.0)

    def value(self, x):
        d = x[0] - self.center
        if self._tau is not None:
            return 0.5 * float(huber(d, self._tau))
        c = self._curv[0] if d < 0 else self._curv[1]
        return 0.5 * c * d * d

    def gradient(self, x):
        d = x[0] - self.center
        if self._tau is not None:
            return np.array([min(max(d, -self._tau), self._tau)])
        c = self._curv[0] if d < 0 else self._curv[1]
        return np.array([c * d])

    def params(self):
        return {"type": self.kind, "kind": self.scalar_kind, "params": list(self.scalar_params)}


def _pad(params, required, total):
    if not required <= len(params) <= total:
        raise ArgumentError(f"expected {required} to {total} parameters, got {len(params)}")
    return params + (0.0,) * (total - len(params))


def scaled_quadratic(c, L, center=0.0):
    return ScalarProblem("scaled-quadratic", (c, L, center))


def scalar_huber(tau, L, center=0.0):
    return ScalarProblem("scalar-huber", (tau, L, center))


def asymmetric_piecewise(c_left, c_right, L, center=0.0):
    return ScalarProblem("asymmetric-piecewise", (c_left, c_right, L, center))


# --------------------------------------------------------------------------
# Serialization


def problem_from_dict(doc):
    """Rebuild an objective from ``Objective.to_dict`` output.

    Matrices are taken from the document when present and regenerated
    from ``seed`` otherwise.
    """
    kind = doc.get("type")
    if kind == "quadratic":
        n = int(doc["n"])
        if "Q" in doc:
            return QuadraticProblem(np.reshape(doc["Q"], (n, n)), doc["q"], seed=doc.get("seed"))
        return make_quadratic(n, Prng(doc["seed"]))
    if kind == "huber":
        m, n = int(doc["m"]), int(doc["n"])
        if "A" in doc:
            return HuberProblem(np.reshape(doc["A"], (m, n)), doc["y"], doc["tau"],
                                seed=doc.get("seed"))
        return make_huber(m, n, doc["tau"], Prng(doc["seed"]))
    if kind == "hinder-lubin":
        n = int(doc["n"])
        if "gamma" not in doc:
            return make_hinder_lubin(n, doc["delta"], doc["alpha"])
        if "A" in doc:
            A = np.reshape(doc["A"], (int(doc["m"]), n))
            return make_hinder_lubin(n, doc["delta"], doc["alpha"],
                                     {"A": A, "gamma": doc["gamma"], "seed": doc.get("seed")})
        return make_modified_hinder_lubin(int(doc["m"]), n, doc["delta"], doc["alpha"],
                                          doc["gamma"], Prng(doc["seed"]))
    if kind == "scalar":
        return ScalarProblem(doc["kind"], doc["params"])
    raise ArgumentError(f"unknown problem type {kind!r}")
