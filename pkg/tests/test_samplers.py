import numpy as np
import pytest

from ebgan.numerics import ParameterError, make_stream
from ebgan.samplers import (
    AdamState,
    LearningRate,
    MsgldState,
    StepSchedule,
    adam_step,
    msgld_step,
    sa_root_find_toy,
    sa_update,
    step_size,
)


def test_step_size_values():
    assert step_size(0, StepSchedule(1, 1, 1)) == 1.0
    assert step_size(0, StepSchedule(2, 1000, 0.75)) == pytest.approx(2 * 1000 ** -0.75, rel=1e-15)
    assert step_size(0, StepSchedule(2, 1000, 0.75)) == pytest.approx(0.0112468, rel=1e-5)
    assert step_size(15, StepSchedule(1, 1, 1)) == 0.0625


@pytest.mark.parametrize("bad", [(0, 1, 0.75), (1, 0, 0.75), (1, 1, 0.5), (1, 1, 1.01)])
def test_schedule_validation(bad):
    with pytest.raises(ParameterError):
        StepSchedule(*bad)


def test_step_size_decreasing_and_divergent():
    sched = StepSchedule(2, 1000, 0.75)
    t = np.arange(1, 10**6 + 1)
    w = sched.c1 * (t + sched.c2) ** -sched.zeta1
    assert np.all(np.diff(w) < 0)
    assert w[-1] < w[0] / 10
    partial = np.cumsum(w)
    # partial sums track 8 ((T + 1000)^(1/4) - 1000^(1/4)), which is unbounded;
    # the sum of squares stays below 4 * 2 / sqrt(1000)
    for T in (10**4, 10**5, 10**6):
        integral = 8 * ((T + 1000) ** 0.25 - 1000 ** 0.25)
        assert partial[T - 1] == pytest.approx(integral, rel=0.01)
    assert np.sum(w**2) < 8 / np.sqrt(1000)
    assert step_size(10**6, sched) == pytest.approx(w[-1])


def test_learning_rate_schedule():
    assert LearningRate(0.005)(0) == LearningRate(0.005)(1000) == 0.005
    lr = LearningRate(1.0, t0=1.0, decay=0.5)
    assert lr(3) == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        LearningRate(0.0)


def test_msgld_noiseless_first_step():
    theta, grad = np.array([1.0, -2.0]), np.array([0.5, 4.0])
    state = MsgldState.zeros(2, alpha=0.9, rho=1.0, tau=0.0)
    new, st = msgld_step(theta, state, grad, 0.1, make_stream(0, "m"))
    assert np.allclose(new, theta + 0.1 * grad, rtol=0, atol=1e-15)
    assert np.allclose(st.momentum, 0.1 * grad, rtol=0, atol=1e-15)


def test_msgld_fixed_point():
    theta = np.array([3.0, 1.0])
    state = MsgldState.zeros(2, tau=0.0)
    new, st = msgld_step(theta, state, np.zeros(2), 0.2, make_stream(0, "m"))
    assert np.array_equal(new, theta) and np.array_equal(st.momentum, np.zeros(2))


def test_msgld_does_not_mutate_inputs():
    theta, m = np.ones(3), np.ones(3)
    state = MsgldState(m, 0.9, 1.0, 0.5)
    msgld_step(theta, state, np.ones(3), 0.1, make_stream(0, "m"))
    assert np.array_equal(theta, np.ones(3)) and np.array_equal(m, np.ones(3))


def test_msgld_reduces_to_gradient_ascent():
    s = make_stream(1, "g")
    theta = s.normal(5)
    state = MsgldState(s.normal(5), alpha=0.37, rho=0.0, tau=0.0)
    grad = s.normal(5)
    new, _ = msgld_step(theta, state, grad, 0.03, make_stream(1, "noise"))
    assert np.array_equal(new, theta + 0.03 * (grad + 0.0 * state.momentum))


def test_msgld_noise_variance():
    eps = 0.01
    state = MsgldState.zeros(1, alpha=0.9, rho=0.0, tau=1.0)
    theta = np.zeros(1)
    stream = make_stream(2, "var")
    incs = np.empty(10**5)
    for k in range(incs.size):
        new, state = msgld_step(theta, state, np.zeros(1), eps, stream)
        incs[k] = new[0] - theta[0]
        theta = new
    assert abs(incs.var() / (2 * eps) - 1) <= 0.05


def test_msgld_rejects_bad_eps():
    with pytest.raises(ParameterError):
        msgld_step(np.zeros(1), MsgldState.zeros(1), np.zeros(1), 0.0, make_stream(0, "x"))


def test_sa_update_examples():
    theta = np.array([1.0, -2.0, 3.0])
    H = np.array([0.3, 0.1, -1.0])
    assert np.array_equal(sa_update(theta, H, 0.0), theta)
    assert np.array_equal(sa_update(theta, np.zeros(3), 0.7), theta)
    assert np.array_equal(sa_update(theta, -theta, 1.0), np.zeros(3))


def test_adam_zero_grad():
    theta = np.array([1.0, 2.0])
    new, _ = adam_step(theta, AdamState.zeros(2), np.zeros(2), 0.1)
    assert np.array_equal(new, theta)


def test_adam_constant_grad_step_magnitude():
    g = np.array([0.3, -2.0, 1e-3])
    theta = np.zeros(3)
    state = AdamState.zeros(3, beta1=0.5, beta2=0.999)
    for _ in range(2000):
        prev = theta
        theta, state = adam_step(theta, state, g, 0.01)
    assert np.allclose(theta - prev, 0.01 * np.sign(g), rtol=0.01)


def test_adam_sign_equivariance():
    g = make_stream(3, "a").normal(4)
    up, _ = adam_step(np.zeros(4), AdamState.zeros(4), g, 0.05)
    down, _ = adam_step(np.zeros(4), AdamState.zeros(4), -g, 0.05)
    assert np.array_equal(up, -down)


def test_sa_toy_exact_root():
    traj = sa_root_find_toy(3.0, 3.0, 0.0, StepSchedule(2, 10, 0.75), 50, make_stream(0, "sa"))
    assert np.all(traj == 3.0)


def test_sa_toy_unit_step_converges_in_one():
    traj = sa_root_find_toy(3.0, -7.0, 0.0, None, 5, make_stream(0, "sa"), constant_step=1.0)
    assert traj[0] == -7.0 and np.all(traj[1:] == 3.0)


def test_sa_toy_needs_steps():
    with pytest.raises(ParameterError):
        sa_root_find_toy(0.0, 0.0, 1.0, StepSchedule(1, 1, 1), 0, make_stream(0, "sa"))
