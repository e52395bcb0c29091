"""GAN metrics and the stochastic gradient estimators of the EBGAN game.

Discriminator outputs are clamped to ``[EPS_CLIP, 1 - EPS_CLIP]`` before a
metric value is evaluated. Gradients are taken with respect to the
discriminator logit ``a`` (``D = sigmoid(a)``) using closed forms such as
``d/da log(1 - D) = -D``; these are exact and do not vanish when ``D``
rounds to 0 or 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .nn import MlpParams, backward, forward, sigmoid
from .numerics import NumericDomainError, ParameterError

EPS_CLIP = 1e-7


class PhiKind(str, enum.Enum):
    LOG = "log"                 # log D            (phi_1)
    LOG1M = "log1m"             # log(1 - D)       (phi_2)
    NEG_LOG1M = "neg_log1m"     # -log(1 - D)      (minimax phi_3)
    LOG_NS = "log_ns"           # log D            (non-saturating phi_3)
    NEG_SQ = "neg_sq"           # -(1 - D)^2
    IDENTITY_D = "identity_d"   # D


GENERATOR_PHIS = (PhiKind.NEG_LOG1M, PhiKind.LOG_NS, PhiKind.NEG_SQ, PhiKind.IDENTITY_D)


def clamp(d) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if not np.all(np.isfinite(d)) or np.any(d < 0.0) or np.any(d > 1.0):
        raise NumericDomainError("discriminator output outside [0, 1]")
    return np.clip(d, EPS_CLIP, 1.0 - EPS_CLIP)


def phi(kind: PhiKind, d):
    kind = PhiKind(kind)
    d = clamp(d)
    if kind in (PhiKind.LOG, PhiKind.LOG_NS):
        return np.log(d)
    if kind is PhiKind.LOG1M:
        return np.log1p(-d)
    if kind is PhiKind.NEG_LOG1M:
        return -np.log1p(-d)
    if kind is PhiKind.NEG_SQ:
        return -(1.0 - d) ** 2
    return d


def phi_prime(kind: PhiKind, d):
    kind = PhiKind(kind)
    d = clamp(d)
    if kind in (PhiKind.LOG, PhiKind.LOG_NS):
        return 1.0 / d
    if kind is PhiKind.LOG1M:
        return -1.0 / (1.0 - d)
    if kind is PhiKind.NEG_LOG1M:
        return 1.0 / (1.0 - d)
    if kind is PhiKind.NEG_SQ:
        return 2.0 * (1.0 - d)
    return np.ones_like(d)


def phi_logit_grad(kind: PhiKind, logit) -> np.ndarray:
    """d phi(sigmoid(a)) / da, evaluated stably."""
    kind = PhiKind(kind)
    a = np.asarray(logit, dtype=np.float64)
    d, one_minus = sigmoid(a), sigmoid(-a)
    if kind in (PhiKind.LOG, PhiKind.LOG_NS):
        return one_minus
    if kind is PhiKind.LOG1M:
        return -d
    if kind is PhiKind.NEG_LOG1M:
        return d
    if kind is PhiKind.NEG_SQ:
        return 2.0 * one_minus * one_minus * d
    return d * one_minus


def _require_sigmoid(theta_d: MlpParams) -> None:
    if theta_d.output_activation != "sigmoid":
        raise ParameterError("discriminator must have a sigmoid output")


@dataclass(frozen=True)
class PriorSpec:
    """Isotropic Gaussian prior N(0, zeta2 I) on every generator parameter."""

    zeta2: float = 1.0
    kind: str = "isotropic_gaussian"

    def __post_init__(self):
        if not self.zeta2 > 0:
            raise ParameterError(f"prior variance must be > 0, got {self.zeta2}")
        if self.kind != "isotropic_gaussian":
            raise ParameterError(f"unsupported prior kind {self.kind!r}")

    def log_density(self, flat: np.ndarray) -> float:
        return -0.5 * float(flat @ flat) / self.zeta2

    def score(self, flat: np.ndarray) -> np.ndarray:
        return -flat / self.zeta2


def _check_generator(theta_g: MlpParams, theta_d: MlpParams) -> None:
    _require_sigmoid(theta_d)
    if theta_g.layer_sizes[-1] != theta_d.layer_sizes[0]:
        raise ParameterError(
            f"generator output width {theta_g.layer_sizes[-1]} != discriminator input width "
            f"{theta_d.layer_sizes[0]}"
        )


def gen_log_post(theta_g: MlpParams, theta_d: MlpParams, z: np.ndarray, N: int,
                 prior: PriorSpec, phi3: PhiKind) -> float:
    """Mini-batch estimate of log pi(theta_g | theta_d, D) up to a constant."""
    _check_generator(theta_g, theta_d)
    x, _ = forward(theta_g, z)
    d, _ = forward(theta_d, x)
    return N / z.shape[0] * float(np.sum(phi(phi3, d))) + prior.log_density(theta_g.flat)


def gen_log_post_grad(theta_g: MlpParams, theta_d: MlpParams, z: np.ndarray, N: int,
                      prior: PriorSpec, phi3: PhiKind) -> MlpParams:
    """(N/n) sum_i grad phi3(D(G(z_i))) + grad log prior, w.r.t. theta_g."""
    n = z.shape[0]
    if n < 1 or N < n:
        raise ParameterError(f"need 1 <= n <= N, got n={n}, N={N}")
    grad = _routed_grad(theta_g, theta_d, z, phi3, N / n)
    grad.flat += prior.score(theta_g.flat)
    return grad


def gen_objective_grad(theta_g: MlpParams, theta_d: MlpParams, z: np.ndarray, phi3: PhiKind) -> MlpParams:
    """Gradient of mean_i phi3(D(G(z_i))) w.r.t. theta_g (baseline generator objective)."""
    if z.shape[0] < 1:
        raise ParameterError("empty latent batch")
    return _routed_grad(theta_g, theta_d, z, phi3, 1.0 / z.shape[0])


def _routed_grad(theta_g, theta_d, z, phi3, weight):
    _check_generator(theta_g, theta_d)
    x, g_cache = forward(theta_g, z)
    _, d_cache = forward(theta_d, x)
    cot = weight * phi_logit_grad(phi3, d_cache.pre[-1])
    _, dx = backward(theta_d, d_cache, cot, param_grads=False, pre_activation=True)
    grad, _ = backward(theta_g, g_cache, dx)
    return grad


def disc_ascent_grad(theta_d: MlpParams, generators: Sequence[MlpParams], x_batch: np.ndarray,
                     z_batches, phi1: PhiKind = PhiKind.LOG,
                     phi2: PhiKind = PhiKind.LOG1M) -> MlpParams:
    """Ascent direction H for the discriminator objective.

    ``z_batches`` is either one latent matrix shared by every generator or a
    sequence with one matrix per generator. The real term is averaged over
    the real rows, the fake term over all ``J_g * n`` fake rows.
    """
    if len(generators) == 0:
        raise ParameterError("need at least one generator")
    if isinstance(z_batches, np.ndarray):
        z_batches = [z_batches] * len(generators)
    if len(z_batches) != len(generators):
        raise ParameterError(f"{len(z_batches)} latent batches for {len(generators)} generators")
    fakes = []
    for g, z in zip(generators, z_batches):
        _check_generator(g, theta_d)
        fakes.append(forward(g, z)[0])
    fake = np.concatenate(fakes, axis=0)
    return disc_grad_on_samples(theta_d, x_batch, fake, phi1, phi2)


def disc_grad_on_samples(theta_d: MlpParams, real: np.ndarray, fake: np.ndarray,
                         phi1: PhiKind = PhiKind.LOG, phi2: PhiKind = PhiKind.LOG1M) -> MlpParams:
    """Gradient of mean phi1(D(real)) + mean phi2(D(fake)) w.r.t. theta_d."""
    if real.shape[0] < 1 or fake.shape[0] < 1:
        raise ParameterError("empty real or fake batch")
    _require_sigmoid(theta_d)
    both = np.concatenate([real, fake], axis=0)
    _, cache = forward(theta_d, both)
    a = cache.pre[-1]
    nr = real.shape[0]
    cot = np.empty_like(a)
    cot[:nr] = phi_logit_grad(phi1, a[:nr]) / nr
    cot[nr:] = phi_logit_grad(phi2, a[nr:]) / fake.shape[0]
    grad, _ = backward(theta_d, cache, cot, pre_activation=True)
    return grad


def disc_objective_estimate(theta_d: MlpParams, fake: np.ndarray, x_batch: np.ndarray,
                            phi1: PhiKind = PhiKind.LOG, phi2: PhiKind = PhiKind.LOG1M) -> float:
    """Monte Carlo estimate of J_d: mean phi1(D(x)) + mean phi2(D(x_fake))."""
    if x_batch.shape[0] < 1 or fake.shape[0] < 1:
        raise ParameterError("empty batch")
    d_real, _ = forward(theta_d, x_batch)
    d_fake, _ = forward(theta_d, fake)
    return float(np.mean(phi(phi1, d_real)) + np.mean(phi(phi2, d_fake)))
