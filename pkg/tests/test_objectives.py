import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _zoo import PROBLEMS
from restart_agd.errors import ArgumentError, GenerationError
from restart_agd.objectives import (HinderLubinProblem, HuberProblem, QuadraticProblem,
                                    ScalarProblem, asymmetric_piecewise, evaluate, grad,
                                    grad_check, hl_piece, hl_piece_deriv, huber,
                                    make_hinder_lubin, make_huber, make_modified_hinder_lubin,
                                    make_quadratic, power_iteration, problem_from_dict,
                                    scalar_huber, scaled_quadratic)
from restart_agd.prng import Prng

NAMES = sorted(PROBLEMS)


# -- point examples ---------------------------------------------------------

def test_hinder_lubin_value_at_minimizer():
    hl = make_hinder_lubin(100, 1e-4, 1e-4)
    assert evaluate(hl, np.zeros(100)) == 0.0
    assert hl.known_min_value == 0.0
    assert np.array_equal(hl.known_minimizer, np.zeros(100))


def test_huber_piece_values():
    assert huber(0.25, 0.5) == 0.0625
    assert huber(1.0, 0.5) == 0.75
    assert huber(-1.0, 0.5) == 0.75


def test_scaled_quadratic_value():
    assert evaluate(scaled_quadratic(1.0, 10.0), [2.0]) == 2.0


def test_hl_piece_derivative():
    assert hl_piece_deriv(1.0, 1e-4) == 1.0
    # slope of -delta*z - delta^2/2 on the left branch
    assert hl_piece_deriv(-1.0, 1e-4) == -1e-4


def test_hl_piece_is_c1_at_breakpoints():
    d = 0.3
    for z in (-d, d):
        for side in (-1e-9, 1e-9):
            assert abs(hl_piece(z + side, d) - hl_piece(z, d)) < 1e-8
            assert abs(hl_piece_deriv(z + side, d) - hl_piece_deriv(z, d)) < 1e-8


def test_hinder_lubin_hand_value():
    hl = HinderLubinProblem(2, 0.5, 0.0)
    assert evaluate(hl, [-1.0, -1.0]) == pytest.approx(1.125, abs=1e-15)


def test_hinder_lubin_small_minimizer():
    hl = make_hinder_lubin(3, 1e-4, 1e-4)
    assert evaluate(hl, np.zeros(3)) == 0.0
    assert np.array_equal(grad(hl, np.zeros(3)), np.zeros(3))


def test_modified_hinder_lubin_at_zero():
    F = make_modified_hinder_lubin(110, 100, 1e-4, 1e-4, 1e-4, Prng(5))
    assert evaluate(F, np.zeros(100)) == pytest.approx(0.011, rel=1e-14)
    np.testing.assert_allclose(grad(F, np.zeros(100)), 1e-4 * F.A.sum(axis=0),
                               rtol=1e-13, atol=1e-18)
    assert not F.separable


def test_modified_hinder_lubin_smoothness_constant():
    F = make_modified_hinder_lubin(110, 100, 1e-4, 1e-4, 1e-4, Prng(5))
    expected = 100 + 1e-4 + 1e-4 * float(np.sum(F.A ** 2))
    assert F.lipschitz == pytest.approx(expected, rel=1e-14)


def test_quadratic_gradient_and_minimizer():
    Q = make_quadratic(6, Prng(4))
    x = Prng(9).normal_array(6)
    np.testing.assert_allclose(grad(Q, x), Q.Q @ x - Q.q, rtol=1e-14)
    x_star = np.linalg.solve(Q.Q, Q.q)
    np.testing.assert_allclose(Q.known_minimizer, x_star, rtol=1e-12)
    assert np.linalg.norm(grad(Q, Q.known_minimizer)) <= 1e-8 * (1 + Q.lipschitz)


def test_quadratic_n1_structure():
    for seed in range(20):
        Q = make_quadratic(1, Prng(seed))
        assert 50.0 <= Q.lipschitz <= 52.0
        u = Prng(seed).uniform01()
        assert Q.Q[0, 0] == 2 * u + 50


def test_quadratic_n2_seed42_eigenvalues():
    Q = make_quadratic(2, Prng(42))
    assert np.array_equal(Q.Q, Q.Q.T)
    assert np.all(np.linalg.eigvalsh(Q.Q) >= 48)


def test_quadratic_n500_positive_definite():
    Q = make_quadratic(500, Prng(7))
    assert np.linalg.eigvalsh(Q.Q)[0] > 0
    assert Q.lipschitz == pytest.approx(np.linalg.eigvalsh(Q.Q)[-1], rel=1e-10)


def test_quadratic_generation_order():
    g = Prng(3)
    Q0 = g.uniform_array(9).reshape(3, 3)
    q = g.normal_array(3)
    Q = make_quadratic(3, Prng(3))
    assert np.array_equal(Q.Q, Q0 + Q0.T + 50 * np.eye(3))
    assert np.array_equal(Q.q, q)


def test_quadratic_rejects_bad_matrices():
    with pytest.raises(ArgumentError):
        QuadraticProblem(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(GenerationError):
        QuadraticProblem(np.array([[1.0, 0.0], [0.0, -1.0]]), np.zeros(2))
    with pytest.raises(ArgumentError):
        make_quadratic(0, Prng(0))


def test_huber_one_by_one():
    h = HuberProblem(np.array([[1.0]]), np.array([0.0]), 0.5)
    assert h.lipschitz == pytest.approx(1.0, rel=1e-12)
    for x in (-2.0, -0.3, 0.0, 0.1, 3.0):
        assert evaluate(h, [x]) == 0.5 * huber(x, 0.5)
    assert abs(h.known_minimizer[0]) < 1e-12


def test_huber_lipschitz_window_and_oracle():
    h = make_huber(300, 50, 0.5, Prng(3))
    lo = 50 * (np.sqrt(300 / 50) - 1) ** 2 * 0.5
    assert lo <= h.lipschitz <= 4 * 300
    assert h.lipschitz == pytest.approx(np.linalg.eigvalsh(h.A.T @ h.A)[-1], rel=1e-10)
    assert np.linalg.norm(grad(h, h.known_minimizer)) <= 1e-8 * (1 + h.lipschitz)


def test_huber_large_tau_is_least_squares():
    h = make_huber(20, 5, 1e6, Prng(8))
    g = Prng(1)
    for _ in range(10):
        x = g.normal_array(5)
        r = h.A @ x - h.y
        assert np.max(np.abs(r)) < 1e6
        assert evaluate(h, x) == pytest.approx(0.5 * np.dot(r, r), rel=1e-12)


def test_huber_gradient_continuous_across_breakpoint():
    h = HuberProblem(np.array([[1.0]]), np.array([0.0]), 0.5)
    for b in (-0.5, 0.5):
        lo, hi = grad(h, [b - 1e-12])[0], grad(h, [b + 1e-12])[0]
        assert abs(lo - hi) < 1e-11


def test_scalar_problem_validation():
    with pytest.raises(ArgumentError):
        scaled_quadratic(2.0, 1.0)
    with pytest.raises(ArgumentError):
        ScalarProblem("cubic", (1.0, 1.0))
    with pytest.raises(ArgumentError):
        asymmetric_piecewise(1.0, 20.0, 10.0)
    with pytest.raises(ArgumentError):
        scalar_huber(-1.0, 2.0)


def test_evaluation_argument_errors():
    q = make_quadratic(3, Prng(0))
    with pytest.raises(ArgumentError):
        evaluate(q, np.zeros(4))
    with pytest.raises(ArgumentError):
        evaluate(q, [0.0, np.nan, 0.0])
    with pytest.raises(ArgumentError):
        grad(q, [np.inf, 0.0, 0.0])
    with pytest.raises(ArgumentError):
        grad_check(q, np.zeros(3), h=0.0)


def test_power_iteration_diagonal():
    d = np.array([1.0, 7.0, 3.0, 6.999])
    assert power_iteration(lambda v: d * v, 4) == pytest.approx(7.0, rel=1e-10)


# -- gradient checks ----------------------------------------------------------

def test_grad_check_quadratic_n5():
    q = make_quadratic(5, Prng(1))
    assert grad_check(q, Prng(2).normal_array(5)) <= 1e-6


def test_grad_check_hinder_lubin_smooth_region():
    hl = make_hinder_lubin(30, 1e-4, 1e-4)
    x = np.abs(Prng(6).normal_array(30)) + 0.01
    assert grad_check(hl, x) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-1e3, max_value=1e3))
def test_grad_check_scaled_quadratic(x):
    assert grad_check(scaled_quadratic(1.0, 10.0), [x]) <= 1e-9


# -- invariants over every problem type --------------------------------------

def _pairs(dim, count, seed, scale=3.0):
    g = Prng(seed)
    return [(scale * g.normal_array(dim), scale * g.normal_array(dim)) for _ in range(count)]


@pytest.mark.parametrize("name", NAMES)
def test_lipschitz_validity(name):
    obj = PROBLEMS[name]
    for x, y in _pairs(obj.dim, 1000, 31):
        lhs = np.linalg.norm(obj.gradient(x) - obj.gradient(y))
        assert lhs <= obj.lipschitz * np.linalg.norm(x - y) * (1 + 1e-10)


@pytest.mark.parametrize("name", NAMES)
def test_convexity_spot_check(name):
    obj = PROBLEMS[name]
    for x, y in _pairs(obj.dim, 300, 32):
        fx, fy = obj.value(x), obj.value(y)
        assert fy >= fx + np.dot(obj.gradient(x), y - x) - 1e-9 * (1 + abs(fx) + abs(fy))


@pytest.mark.parametrize("name", NAMES)
def test_known_minimizer_optimality(name):
    obj = PROBLEMS[name]
    assert np.linalg.norm(obj.gradient(obj.known_minimizer)) <= 1e-8 * (1 + obj.lipschitz)
    g = Prng(33)
    for _ in range(100):
        assert obj.known_min_value <= obj.value(g.normal_array(obj.dim))


@pytest.mark.parametrize("name", [n for n in NAMES if PROBLEMS[n].separable])
def test_separability(name):
    obj = PROBLEMS[name]
    g = Prng(34)
    for _ in range(20):
        x = g.normal_array(obj.dim)
        j = int(g.uniform01() * obj.dim)
        xp = x.copy()
        xp[j] += 1.0 + g.uniform01()
        diff = obj.gradient(xp) - obj.gradient(x)
        mask = np.arange(obj.dim) != j
        assert np.all(diff[mask] == 0.0)


def test_separability_flags():
    assert PROBLEMS["hinder-lubin"].separable
    assert not PROBLEMS["hinder-lubin-mod"].separable
    assert not PROBLEMS["quadratic"].separable
    assert all(PROBLEMS[n].separable for n in NAMES if n.startswith("scalar"))


# -- serialization ------------------------------------------------------------

@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("include", [False, True])
def test_problem_round_trip(name, include):
    obj = PROBLEMS[name]
    doc = json.loads(json.dumps(obj.to_dict(include_matrices=include)))
    back = problem_from_dict(doc)
    assert back.dim == obj.dim and back.lipschitz == obj.lipschitz
    x = Prng(35).normal_array(obj.dim)
    assert back.value(x) == obj.value(x)
    assert np.array_equal(back.gradient(x), obj.gradient(x))


def test_matrices_are_row_major():
    q = make_quadratic(3, Prng(2))
    doc = q.to_dict(include_matrices=True)
    assert doc["Q"] == [float(v) for v in q.Q.reshape(-1)]
    m = make_huber(4, 2, 0.5, Prng(3)).to_dict(include_matrices=True)
    assert np.array_equal(np.array(m["A"]).reshape(4, 2), make_huber(4, 2, 0.5, Prng(3)).A)
