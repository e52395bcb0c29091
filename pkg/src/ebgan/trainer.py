"""EBGAN training (MSGLD generators + stochastic-approximation discriminator)
and single-generator GAN baselines trained with Adam.

Random streams are keyed by purpose, generator index and iteration, e.g.
``(seed, "noise", j, t)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import LatentSpec, MixtureDataset, Standardizer, minibatch, sample_latent, standardized_view
from .nn import INIT_SCHEMES, MlpParams, forward, init_mlp, with_input_affine, with_output_affine
from .numerics import ParameterError, make_stream
from .objectives import (
    PhiKind,
    PriorSpec,
    disc_grad_on_samples,
    disc_objective_estimate,
    gen_log_post_grad,
    gen_objective_grad,
)
from .samplers import (
    AdamState,
    LearningRate,
    MsgldState,
    StepSchedule,
    adam_step,
    msgld_step,
    sa_update,
    step_size,
)

log = logging.getLogger(__name__)

METHODS = ("ebgan", "gan_minimax", "gan_nonsaturating")
METRIC_COLUMNS = ("iter", "w_t", "eps_t", "mean_d_real", "mean_d_fake", "jd_estimate")


@dataclass(frozen=True)
class TrainConfig:
    method: str = "ebgan"
    J_g: int = 10
    n: int = 100
    iterations: int = 2500
    phi3: PhiKind = PhiKind.NEG_LOG1M
    sched: StepSchedule = StepSchedule(2.0, 1000.0, 0.75)
    eps: float = 0.005
    eps_t0: float = 1.0
    eps_decay: float = 0.0
    eps_per_datum: bool = False
    alpha: float = 0.9
    rho: float = 1.0
    tau: float = 0.01
    prior: PriorSpec = PriorSpec(1.0)
    disc_hidden: tuple[int, ...] = (1000,)
    gen_hidden: tuple[int, ...] = (1000,)
    gen_output: str = "identity"
    latent: LatentSpec = LatentSpec()
    init_std: float = 1.0
    init_scheme: str = "gaussian"
    shared_z: bool = False
    # train on per-coordinate standardized data; returned networks act on raw data
    standardize: bool = True
    # baselines (Adam)
    disc_lr: float = 0.0002
    gen_lr: float = 0.0002
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    seed: int = 0
    metric_every: int = 10
    eval_size: int = 512

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "phi3", PhiKind(self.phi3))
        for name in ("J_g", "n", "metric_every", "eval_size"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if self.iterations < 0:
            raise ParameterError("iterations must be >= 0")
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError("alpha must lie in [0, 1)")
        if self.rho < 0 or self.tau < 0:
            raise ParameterError("rho and tau must be >= 0")
        if self.disc_lr < 0 or self.gen_lr < 0:
            raise ParameterError("learning rates must be >= 0")
        if self.init_scheme not in INIT_SCHEMES:
            raise ParameterError(f"init_scheme must be one of {INIT_SCHEMES}, got {self.init_scheme!r}")
        if self.standardize and self.gen_output != "identity":
            raise ParameterError("standardize needs gen_output 'identity'")
        LearningRate(self.eps, self.eps_t0, self.eps_decay)

    @property
    def learning_rate(self) -> LearningRate:
        return LearningRate(self.eps, self.eps_t0, self.eps_decay)

    def disc_sizes(self, d_x: int) -> tuple[int, ...]:
        return (d_x, *self.disc_hidden, 1)

    def gen_sizes(self, d_x: int) -> tuple[int, ...]:
        return (self.latent.d_z, *self.gen_hidden, d_x)


@dataclass
class GeneratorEnsemble:
    params: list[MlpParams]
    states: list[MsgldState]

    def __len__(self) -> int:
        return len(self.params)


@dataclass
class RunLog:
    records: list[dict] = field(default_factory=list)
    disc: Optional[MlpParams] = None
    ensemble: Optional[GeneratorEnsemble] = None
    abort: Optional[dict] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records])

    def window_mean(self, name: str, lo: int, hi: int) -> float:
        it = self.column("iter")
        sel = (it >= lo) & (it <= hi)
        if not np.any(sel):
            raise ParameterError(f"no records in iteration window [{lo}, {hi}]")
        return float(np.mean(self.column(name)[sel]))


class TrainingDiverged(RuntimeError):
    def __init__(self, iteration: int, reason: str, log: RunLog):
        super().__init__(f"training diverged at iteration {iteration}: {reason}")
        self.iteration = iteration
        self.log = log


def init_discriminator(cfg: TrainConfig, d_x: int) -> MlpParams:
    # shared by all methods so comparisons isolate the training rule
    return init_mlp(cfg.disc_sizes(d_x), "sigmoid", cfg.init_std, make_stream(cfg.seed, "init", "disc"),
                    cfg.init_scheme)


def init_generator(cfg: TrainConfig, d_x: int, j: int) -> MlpParams:
    return init_mlp(cfg.gen_sizes(d_x), cfg.gen_output, cfg.init_std, make_stream(cfg.seed, "init", "gen", j),
                    cfg.init_scheme)


def sample_fake(ensemble, per_gen: int, latent: LatentSpec, stream) -> np.ndarray:
    """``per_gen`` rows from every generator, concatenated in generator order."""
    if per_gen < 1:
        raise ParameterError("per_gen must be >= 1")
    params = ensemble.params if isinstance(ensemble, GeneratorEnsemble) else list(ensemble)
    return np.concatenate([forward(g, sample_latent(latent, per_gen, stream))[0] for g in params])


class _Evaluator:
    """Fixed evaluation batches drawn once per run."""

    def __init__(self, cfg: TrainConfig, ds: MixtureDataset, n_gen: int):
        size = min(cfg.eval_size, ds.N)
        self.real = minibatch(ds, size, make_stream(cfg.seed, "eval", "real"))
        z = sample_latent(cfg.latent, cfg.eval_size, make_stream(cfg.seed, "eval", "latent"))
        self.z = np.array_split(z, n_gen) if n_gen <= cfg.eval_size else [z] * n_gen

    def record(self, t: int, w: float, eps: float, disc: MlpParams, gens: list[MlpParams]) -> dict:
        fake = np.concatenate([forward(g, z)[0] for g, z in zip(gens, self.z)])
        d_real = forward(disc, self.real)[0]
        d_fake = forward(disc, fake)[0]
        return {
            "iter": t,
            "w_t": w,
            "eps_t": eps,
            "mean_d_real": float(np.mean(d_real)),
            "mean_d_fake": float(np.mean(d_fake)),
            "jd_estimate": disc_objective_estimate(disc, fake, self.real),
        }


def _assert_finite(t: int, runlog: RunLog, **arrays) -> None:
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            runlog.abort = {"iteration": t, "reason": f"non-finite {name}"}
            raise TrainingDiverged(t, f"non-finite {name}", runlog)


def generator_eps(cfg: TrainConfig, t: int, N: int) -> float:
    """MSGLD learning rate at iteration t; ``eps_per_datum`` divides it by the dataset size."""
    eps = cfg.learning_rate(t)
    return eps / N if cfg.eps_per_datum else eps


def ebgan_iteration(t: int, cfg: TrainConfig, ds: MixtureDataset, disc: MlpParams,
                    ensemble: GeneratorEnsemble) -> tuple[MlpParams, GeneratorEnsemble, float, float]:
    """Iteration ``t >= 1``: MSGLD step for every generator against the frozen
    discriminator, then one stochastic-approximation step for the discriminator."""
    eps = generator_eps(cfg, t, ds.N)
    new_params, new_states = [], []
    for j, (g, state) in enumerate(zip(ensemble.params, ensemble.states)):
        z = sample_latent(cfg.latent, cfg.n, make_stream(cfg.seed, "latent", j, t))
        grad = gen_log_post_grad(g, disc, z, ds.N, cfg.prior, cfg.phi3)
        flat, state = msgld_step(g.flat, state, grad.flat, eps, make_stream(cfg.seed, "noise", j, t))
        new_params.append(g.like(flat))
        new_states.append(state)
    H = ebgan_disc_direction(t, cfg, ds, disc, new_params)
    w = step_size(t, cfg.sched)
    disc = disc.like(sa_update(disc.flat, H.flat, w))
    return disc, GeneratorEnsemble(new_params, new_states), w, eps


def ebgan_disc_direction(t: int, cfg: TrainConfig, ds: MixtureDataset, disc: MlpParams,
                         gens: list[MlpParams]) -> MlpParams:
    """H averaged over generators; generator j is paired with its own real batch."""
    reals, fakes = [], []
    shared = sample_latent(cfg.latent, cfg.n, make_stream(cfg.seed, "hlatent", t)) if cfg.shared_z else None
    for j, g in enumerate(gens):
        reals.append(minibatch(ds, cfg.n, make_stream(cfg.seed, "batch", j, t)))
        z = shared if shared is not None else sample_latent(cfg.latent, cfg.n, make_stream(cfg.seed, "hlatent", j, t))
        fakes.append(forward(g, z)[0])
    return disc_grad_on_samples(disc, np.concatenate(reals), np.concatenate(fakes))


def train_ebgan(cfg: TrainConfig, ds: MixtureDataset) -> RunLog:
    if cfg.method != "ebgan":
        raise ParameterError(f"train_ebgan needs method 'ebgan', got {cfg.method!r}")
    d_x = ds.X.shape[1]
    disc = init_discriminator(cfg, d_x)
    gens = [init_generator(cfg, d_x, j) for j in range(cfg.J_g)]
    ensemble = GeneratorEnsemble(gens, [MsgldState.zeros(g.size, cfg.alpha, cfg.rho, cfg.tau) for g in gens])
    ev = _Evaluator(cfg, ds, cfg.J_g)
    runlog = RunLog()
    runlog.records.append(ev.record(0, step_size(0, cfg.sched), generator_eps(cfg, 0, ds.N), disc, ensemble.params))
    for t in range(1, cfg.iterations + 1):
        disc, ensemble, w, eps = ebgan_iteration(t, cfg, ds, disc, ensemble)
        _assert_finite(t, runlog, discriminator=disc.flat,
                       generators=np.concatenate([g.flat for g in ensemble.params]))
        if t % cfg.metric_every == 0 or t == cfg.iterations:
            rec = ev.record(t, w, eps, disc, ensemble.params)
            runlog.records.append(rec)
            if t % (cfg.metric_every * 50) == 0:
                log.info("ebgan t=%d D(real)=%.3f D(fake)=%.3f", t, rec["mean_d_real"], rec["mean_d_fake"])
    runlog.disc, runlog.ensemble = disc, ensemble
    return runlog


def baseline_phi3(method: str) -> PhiKind:
    return PhiKind.NEG_LOG1M if method == "gan_minimax" else PhiKind.LOG_NS


def train_gan_baseline(cfg: TrainConfig, ds: MixtureDataset) -> RunLog:
    """Alternating Adam ascent on J_d (discriminator) and J_g (one generator)."""
    if cfg.method not in ("gan_minimax", "gan_nonsaturating"):
        raise ParameterError(f"not a baseline method: {cfg.method!r}")
    phi3 = baseline_phi3(cfg.method)
    d_x = ds.X.shape[1]
    disc = init_discriminator(cfg, d_x)
    gen = init_generator(cfg, d_x, 0)
    d_state = AdamState.zeros(disc.size, cfg.adam_beta1, cfg.adam_beta2)
    g_state = AdamState.zeros(gen.size, cfg.adam_beta1, cfg.adam_beta2)
    ev = _Evaluator(cfg, ds, 1)
    runlog = RunLog()
    runlog.records.append(ev.record(0, cfg.disc_lr, cfg.gen_lr, disc, [gen]))
    for t in range(1, cfg.iterations + 1):
        disc, gen, d_state, g_state = baseline_iteration(t, cfg, ds, disc, gen, d_state, g_state, phi3)
        _assert_finite(t, runlog, discriminator=disc.flat, generator=gen.flat)
        if t % cfg.metric_every == 0 or t == cfg.iterations:
            runlog.records.append(ev.record(t, cfg.disc_lr, cfg.gen_lr, disc, [gen]))
    runlog.disc = disc
    runlog.ensemble = GeneratorEnsemble([gen], [MsgldState.zeros(gen.size, cfg.alpha, cfg.rho, 0.0)])
    return runlog


def baseline_iteration(t, cfg, ds, disc, gen, d_state, g_state, phi3):
    x = minibatch(ds, cfg.n, make_stream(cfg.seed, "batch", 0, t))
    z_d = sample_latent(cfg.latent, cfg.n, make_stream(cfg.seed, "hlatent", 0, t))
    if cfg.disc_lr > 0:
        H = disc_grad_on_samples(disc, x, forward(gen, z_d)[0])
        flat, d_state = adam_step(disc.flat, d_state, H.flat, cfg.disc_lr)
        disc = disc.like(flat)
    if cfg.gen_lr > 0:
        z_g = sample_latent(cfg.latent, cfg.n, make_stream(cfg.seed, "latent", 0, t))
        grad = gen_objective_grad(gen, disc, z_g, phi3)
        flat, g_state = adam_step(gen.flat, g_state, grad.flat, cfg.gen_lr)
        gen = gen.like(flat)
    return disc, gen, d_state, g_state


def train(cfg: TrainConfig, ds: MixtureDataset) -> RunLog:
    """Run ``cfg.method``.  With ``standardize`` the networks are trained on
    standardized rows and the affine map is folded back into the discriminator's
    first and every generator's last layer, so the returned networks (and all
    logged D values, which the map leaves unchanged) refer to raw data."""
    run = train_ebgan if cfg.method == "ebgan" else train_gan_baseline
    if not cfg.standardize:
        return run(cfg, ds)
    st = Standardizer.fit(ds.X)
    runlog = run(cfg, standardized_view(ds, st))
    return to_data_space(runlog, st)


def to_data_space(runlog: RunLog, st: Standardizer) -> RunLog:
    runlog.disc = with_input_affine(runlog.disc, st.mean, st.scale)
    ens = runlog.ensemble
    runlog.ensemble = GeneratorEnsemble([with_output_affine(g, st.mean, st.scale) for g in ens.params], ens.states)
    return runlog
