import numpy as np
import pytest

from restart_agd import engine
from restart_agd.errors import ArgumentError
from restart_agd.iterates import MomentumSchedule, SolverState, t_step
from restart_agd.objectives import (QuadraticProblem, make_hinder_lubin,
                                    make_modified_hinder_lubin, make_quadratic, scalar_huber,
                                    scaled_quadratic)
from restart_agd.policies import (CLI_NAMES, RestartPolicy, apply_restart_gb,
                                  apply_restart_keep_next, apply_restart_keep_prev,
                                  run_coordinatewise, should_restart_function_value,
                                  should_restart_gb, should_restart_gradient)
from restart_agd.prng import Prng

pytestmark = pytest.mark.usefixtures("no_mutation")


def test_function_value_condition():
    assert not should_restart_function_value(1.0, 2.0)
    assert should_restart_function_value(2.0, 1.0)
    assert not should_restart_function_value(1.0, 1.0)


def test_gradient_condition():
    assert should_restart_gradient([1.0], [2.0], [1.0])
    assert not should_restart_gradient([-1.0], [2.0], [1.0])
    assert not should_restart_gradient([0.0], [5.0], [1.0])
    assert not should_restart_gradient([1.0, -1.0], [1.0, 1.0], [0.0, 0.0])


def test_gb_condition():
    assert not should_restart_gb([1.0, 2.0], [1.0, 2.0], [7.0, -3.0])
    assert should_restart_gb([0.0], [1.0], [0.0])
    assert not should_restart_gb([0.0], [1.0], [1.0])


def _state(x_curr, index=7):
    s = MomentumSchedule("linear")
    for _ in range(index):
        s.advance()
    x = np.array([x_curr])
    return SolverState(12, x + 0.3, x, x - 0.1, s, steps_since_restart=5)


def test_apply_keep_prev():
    new = apply_restart_keep_prev(_state(1.0), np.array([0.5]))
    assert new.x_curr[0] == 1.0 and new.y_curr[0] == 1.0
    assert (new.schedule.index, new.schedule.t) == (0, 1.0)
    assert new.steps_since_restart == 0


def test_apply_keep_next():
    old = _state(1.0)
    new = apply_restart_keep_next(old, np.array([0.5]))
    assert new.x_curr[0] == 0.5 and new.y_curr[0] == 0.5
    assert new.x_prev[0] == 1.0
    assert (new.schedule.index, new.schedule.t) == (0, 1.0)
    assert new.steps_since_restart == 0
    assert old.schedule.index == 7


def test_keep_next_then_plain_gradient_step():
    obj = scaled_quadratic(1.0, 10.0)
    new = apply_restart_keep_next(_state(1.0), np.array([0.5]))
    state, x = engine.agd_step(new, obj)
    assert x[0] == pytest.approx(0.45, abs=1e-16)
    assert t_step(obj, new.y_curr)[0] == x[0]


def test_apply_gb_keeps_schedule_by_default():
    new = apply_restart_gb(_state(1.0), np.array([0.5]))
    assert new.y_curr[0] == 0.5 and new.x_curr[0] == 0.5
    assert new.schedule.index == 8
    assert apply_restart_gb(_state(1.0), np.array([0.5]), reset_schedule=True).schedule.index == 0


def test_policy_names():
    assert set(CLI_NAMES) == {"none", "fval", "grad-prev", "grad-next", "gb", "coord"}
    for name in CLI_NAMES:
        assert RestartPolicy.from_name(name).name == name
    with pytest.raises(ArgumentError):
        RestartPolicy.from_name("random")


# -- semantics in full runs ---------------------------------------------------

def test_keep_prev_logs_discarded_candidate():
    obj = scaled_quadratic(1.0, 10.0)
    trace = engine.run(obj, [1.0], "grad-prev", max_iters=300)
    hits = [r for r in trace.records if r.restarted]
    assert hits
    for r in hits:
        assert r.discarded_f is not None and r.discarded_f >= 0
        # the next record repeats x_k
        assert trace.records[r.k + 1].x_snapshot[0] == r.x_snapshot[0]


def test_fval_is_monotone():
    obj = make_quadratic(40, Prng(6))
    trace = engine.run(obj, np.ones(40), "fval", max_iters=500)
    f = trace.f_values()
    assert trace.restart_iterations
    assert np.all(np.diff(f) <= 0)
    assert trace.f_evals == 500


def test_gradient_policies_share_decisions_on_common_prefix():
    for obj, x0 in ((scaled_quadratic(1.0, 10.0), [1.0]),
                    (make_quadratic(25, Prng(8)), np.ones(25))):
        prev = engine.run(obj, x0, "grad-prev", max_iters=300, store_iterates=True)
        nxt = engine.run(obj, x0, "grad-next", max_iters=300, store_iterates=True)
        r_first = nxt.restart_iterations[0]
        assert prev.restart_iterations[0] == r_first
        for a, b in zip(prev.records[:r_first + 1], nxt.records[:r_first + 1]):
            assert np.array_equal(a.x_snapshot, b.x_snapshot)
            assert a.restarted == b.restarted


def test_gb_never_resets_schedule():
    obj = scaled_quadratic(1.0, 10.0)
    trace = engine.run(obj, [1.0], "gb", max_iters=400)
    assert trace.restart_iterations
    ts = [r.t for r in trace.records]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    reset = engine.run(obj, [1.0], RestartPolicy.from_name("gb", gb_resets_schedule=True),
                       max_iters=400)
    assert any(r.t == 1.0 for r in reset.records[1:])


def test_restart_reinitializes_momentum():
    obj = scaled_quadratic(1.0, 10.0)
    trace = engine.run(obj, [1.0], "grad-next", max_iters=300)
    for r in trace.restart_iterations:
        assert trace.records[r + 1].t == 1.0


# -- coordinate-wise driver ---------------------------------------------------

@pytest.mark.parametrize("obj,x0", [(scaled_quadratic(1.0, 10.0), 1.0),
                                    (scalar_huber(0.5, 4.0, -0.75), 3.0)])
def test_coord_in_1d_equals_grad_next(obj, x0):
    a = engine.run(obj, [x0], "coord", max_iters=500)
    b = engine.run(obj, [x0], "grad-next", max_iters=500)
    assert [r.f_value for r in a.records] == [r.f_value for r in b.records]
    assert a.restart_iterations == b.restart_iterations
    assert [r.t for r in a.records] == [r.t for r in b.records]


def test_coord_desynchronizes_coordinates():
    q = QuadraticProblem(np.diag([1.0, 50.0]), np.zeros(2), lipschitz=50.0)
    assert q.separable
    trace = run_coordinatewise(q, np.ones(2), max_iters=400)
    rx, ry = trace.coord_restarts
    assert rx and rx != ry
    # each coordinate of a separable problem is an independent scalar keep-next run
    for c, lst in ((1.0, rx), (50.0, ry)):
        ref = engine.run(scaled_quadratic(c, 50.0), [1.0], "grad-next", max_iters=400)
        assert lst == [k for k in ref.restart_iterations if k < len(trace.records) - 1]
    assert trace.restart_iterations == sorted(set(rx) | set(ry))


def test_coord_rejects_nonseparable():
    F = make_modified_hinder_lubin(12, 10, 1e-4, 1e-4, 1e-4, Prng(1))
    with pytest.raises(ArgumentError):
        engine.run(F, np.ones(10), "coord", max_iters=10)
    ok = engine.run(F, np.ones(10), RestartPolicy.from_name("coord", allow_nonseparable=True),
                    max_iters=10)
    assert len(ok.records) == 11


def test_coord_one_gradient_per_iteration():
    hl = make_hinder_lubin(20, 1e-4, 1e-4)
    trace = engine.run(hl, np.ones(20), "coord", max_iters=123)
    assert trace.grad_evals == 123


def test_coord_beats_grad_next_on_separable_hinder_lubin():
    hl = make_hinder_lubin(100, 1e-4, 1e-4)
    coord = engine.run(hl, np.ones(100), "coord", max_iters=5000)
    nxt = engine.run(hl, np.ones(100), "grad-next", max_iters=5000)
    k_coord, k_next = coord.iterations_to_gap(1e-8), nxt.iterations_to_gap(1e-8)
    assert k_coord is not None
    assert k_next is None or k_coord < k_next
