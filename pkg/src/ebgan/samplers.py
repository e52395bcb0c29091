"""MSGLD sampling, stochastic-approximation updates, schedules and Adam.

All update functions act on flat float64 parameter vectors (``MlpParams.flat``
for networks) and return new arrays; inputs are never modified in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import ParameterError, RngStream


@dataclass(frozen=True)
class StepSchedule:
    """w_t = c1 * (t + c2) ** -zeta1."""

    c1: float
    c2: float
    zeta1: float = 0.75

    def __post_init__(self):
        if not self.c1 > 0 or not self.c2 > 0:
            raise ParameterError(f"need c1 > 0 and c2 > 0, got c1={self.c1}, c2={self.c2}")
        if not 0.5 < self.zeta1 <= 1.0:
            raise ParameterError(f"zeta1 must lie in (0.5, 1], got {self.zeta1}")


def step_size(t: int, sched: StepSchedule) -> float:
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    return sched.c1 * (t + sched.c2) ** (-sched.zeta1)


@dataclass(frozen=True)
class LearningRate:
    """Generator learning rate eps_t = eps0 * (t + t0) ** -decay; decay=0 gives a constant."""

    eps0: float
    t0: float = 1.0
    decay: float = 0.0

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ParameterError(f"learning rate must be > 0, got {self.eps0}")
        if not 0.0 <= self.decay < 1.0:
            raise ParameterError(f"decay must lie in [0, 1), got {self.decay}")
        if self.decay > 0 and not self.t0 > 0:
            raise ParameterError("t0 must be > 0 for a decaying learning rate")

    def __call__(self, t: int) -> float:
        if self.decay == 0.0:
            return self.eps0
        return self.eps0 * (t + self.t0) ** (-self.decay)


@dataclass
class MsgldState:
    momentum: np.ndarray
    alpha: float = 0.9
    rho: float = 1.0
    tau: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.rho < 0 or self.tau < 0:
            raise ParameterError("rho and tau must be >= 0")

    @classmethod
    def zeros(cls, n: int, alpha: float = 0.9, rho: float = 1.0, tau: float = 0.01) -> MsgldState:
        return cls(np.zeros(n), alpha, rho, tau)


def msgld_step(theta: np.ndarray, state: MsgldState, grad: np.ndarray, eps: float,
               stream: RngStream) -> tuple[np.ndarray, MsgldState]:
    """One MSGLD move.

    theta' = theta + eps * (grad + rho * m) + N(0, 2 * tau * eps)
    m'     = alpha * m + (1 - alpha) * grad
    """
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    if theta.shape != grad.shape or theta.shape != state.momentum.shape:
        raise ParameterError(
            f"shape mismatch: theta {theta.shape}, grad {grad.shape}, momentum {state.momentum.shape}"
        )
    noise = stream.normal(theta.shape, 0.0, np.sqrt(2.0 * state.tau * eps))
    new_theta = theta + eps * (grad + state.rho * state.momentum) + noise
    new_m = state.alpha * state.momentum + (1.0 - state.alpha) * grad
    return new_theta, MsgldState(new_m, state.alpha, state.rho, state.tau)


def sa_update(theta_d: np.ndarray, H: np.ndarray, w: float) -> np.ndarray:
    if theta_d.shape != H.shape:
        raise ParameterError(f"shape mismatch: {theta_d.shape} vs {H.shape}")
    return theta_d + w * H


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0

    @classmethod
    def zeros(cls, n: int, beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
        return cls(np.zeros(n), np.zeros(n), beta1, beta2, eps, 0)


def adam_step(theta: np.ndarray, state: AdamState, grad: np.ndarray, lr: float,
              ascent: bool = True) -> tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam; ascends ``grad`` by default since GAN objectives are maximized."""
    if lr < 0:
        raise ParameterError(f"lr must be >= 0, got {lr}")
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ParameterError("shape mismatch between parameters, gradient and Adam state")
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    delta = lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_theta = theta + delta if ascent else theta - delta
    return new_theta, AdamState(m, v, state.beta1, state.beta2, state.eps, t)


def sa_root_find_toy(theta_star, theta0, noise_std: float, sched: StepSchedule | None, T: int,
                     stream: RngStream, constant_step: float | None = None) -> np.ndarray:
    """Robbins-Monro iterates for the mean field h(theta) = theta_star - theta.

    theta_{k+1} = theta_k + w_{k+1} * (h(theta_k) + xi_k),  xi_k ~ N(0, noise_std^2).
    ``theta0`` may be an array of independent replicates. Returns the
    trajectory with shape ``(T + 1,) + shape(theta0)``.
    """
    if T < 1:
        raise ParameterError(f"T must be >= 1, got {T}")
    if sched is None and constant_step is None:
        raise ParameterError("need a schedule or a constant step")
    theta = np.array(theta0, dtype=np.float64)
    traj = np.empty((T + 1,) + theta.shape)
    traj[0] = theta
    for k in range(T):
        w = constant_step if constant_step is not None else step_size(k + 1, sched)
        xi = stream.normal(theta.shape, 0.0, noise_std) if noise_std > 0 else 0.0
        theta = theta + w * ((theta_star - theta) + xi)
        traj[k + 1] = theta
    return traj
