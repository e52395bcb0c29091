import math

import numpy as np
import pytest

from ebgan.nn import MlpParams, finite_diff_grad, forward, init_mlp
from ebgan.numerics import NumericDomainError, ParameterError, make_stream
from ebgan.objectives import (
    EPS_CLIP,
    GENERATOR_PHIS,
    PhiKind,
    PriorSpec,
    disc_ascent_grad,
    disc_objective_estimate,
    gen_log_post,
    gen_log_post_grad,
    gen_objective_grad,
    phi,
    phi_logit_grad,
    phi_prime,
)

from conftest import rel_err


def constant_disc(d_x, value, hidden=3):
    """Discriminator with zero weights and final bias logit(value): D == value everywhere."""
    net = MlpParams((d_x, hidden, 1), np.zeros(d_x * hidden + hidden + hidden + 1), "sigmoid")
    net.biases[-1][:] = math.log(value / (1 - value))
    return net


def test_phi_values():
    assert phi(PhiKind.LOG, 0.5) == pytest.approx(-0.6931471805599453, abs=1e-15)
    assert phi(PhiKind.NEG_SQ, 1.0 - EPS_CLIP) == pytest.approx(0.0, abs=1e-13)
    assert phi(PhiKind.NEG_LOG1M, 0.9) == pytest.approx(2.302585092994046, rel=1e-12)


def test_phi_domain():
    with pytest.raises(NumericDomainError):
        phi(PhiKind.LOG, 1.5)
    with pytest.raises(NumericDomainError):
        phi(PhiKind.LOG, -0.1)
    # boundary values are clamped, never -inf
    assert np.isfinite(phi(PhiKind.LOG, 0.0))
    assert np.isfinite(phi(PhiKind.LOG1M, 1.0))


@pytest.mark.parametrize("kind", list(PhiKind))
def test_phi_prime_matches_central_difference(kind):
    d = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (phi(kind, d + h) - phi(kind, d - h)) / (2 * h)
    assert np.allclose(phi_prime(kind, d), fd, rtol=1e-6)


@pytest.mark.parametrize("kind", list(PhiKind))
def test_logit_grad_matches_chain_rule(kind):
    a = np.linspace(-6, 6, 25)
    d = 1 / (1 + np.exp(-a))
    assert np.allclose(phi_logit_grad(kind, a), phi_prime(kind, d) * d * (1 - d), rtol=1e-9)


def test_logit_grad_survives_saturation():
    # sigmoid(60) rounds to 1.0, but d/da log(1 - D) = -D is still -1
    assert phi_logit_grad(PhiKind.LOG1M, 60.0) == pytest.approx(-1.0)
    assert phi_logit_grad(PhiKind.LOG, -60.0) == pytest.approx(1.0)


@pytest.mark.parametrize("kind", GENERATOR_PHIS)
def test_generator_phis_increasing(kind):
    d = np.linspace(EPS_CLIP, 1 - EPS_CLIP, 100001)
    assert np.all(phi_prime(kind, d) > 0)


def test_prior_validation():
    with pytest.raises(ParameterError):
        PriorSpec(0.0)


def test_gen_grad_zero_fixed_point():
    g = MlpParams((3, 5, 4), np.zeros(3 * 5 + 5 + 5 * 4 + 4), "identity")
    d = MlpParams((4, 3, 1), np.zeros(4 * 3 + 3 + 3 + 1), "sigmoid")
    z = make_stream(0, "z").normal((6, 3))
    grad = gen_log_post_grad(g, d, z, 60, PriorSpec(10.0), PhiKind.NEG_LOG1M)
    assert np.all(grad.flat == 0)


def test_gen_grad_is_prior_score_when_disc_flat():
    g = init_mlp((3, 5, 4), "identity", 1.0, make_stream(1, "g"))
    d = MlpParams((4, 3, 1), np.zeros(4 * 3 + 3 + 3 + 1), "sigmoid")
    z = make_stream(1, "z").normal((6, 3))
    grad = gen_log_post_grad(g, d, z, 60, PriorSpec(1.0), PhiKind.NEG_LOG1M)
    assert np.array_equal(grad.flat, -g.flat)


def test_gen_grad_batch_checks(small_nets):
    g, d = small_nets(0)
    with pytest.raises(ParameterError):
        gen_log_post_grad(g, d, np.ones((5, 3)), 4, PriorSpec(), PhiKind.NEG_LOG1M)


@pytest.mark.parametrize("kind", GENERATOR_PHIS)
@pytest.mark.parametrize("trial", range(20))
def test_gen_grad_finite_differences(small_nets, kind, trial):
    g, d = small_nets(100 + trial)
    z = make_stream(trial, "z").normal((5, 3))
    prior = PriorSpec(2.0)
    grad = gen_log_post_grad(g, d, z, 40, prior, kind)
    fd = finite_diff_grad(lambda p: gen_log_post(p, d, z, 40, prior, kind), g, 1e-5)
    assert rel_err(grad.flat, fd.flat) <= 1e-4


def _jd_value(theta_d, gens, x, zs):
    fake = np.concatenate([forward(g, z)[0] for g, z in zip(gens, zs)])
    return disc_objective_estimate(theta_d, fake, x)


@pytest.mark.parametrize("trial", range(20))
def test_disc_grad_finite_differences(small_nets, trial):
    g1, d = small_nets(200 + trial)
    g2, _ = small_nets(300 + trial)
    s = make_stream(trial, "xz")
    x = s.normal((5, 4))
    zs = [s.normal((5, 3)), s.normal((5, 3))]
    H = disc_ascent_grad(d, [g1, g2], x, zs)
    fd = finite_diff_grad(lambda p: _jd_value(p, [g1, g2], x, zs), d, 1e-5)
    assert rel_err(H.flat, fd.flat) <= 1e-4


def test_disc_grad_fake_equals_real(small_nets):
    # J_g = 1 and a generator that reproduces the real batch exactly
    _, d = small_nets(7)
    x = make_stream(7, "x").normal((5, 4))
    ident = MlpParams((4, 4), np.concatenate([np.eye(4).ravel(), np.zeros(4)]), "identity")
    H = disc_ascent_grad(d, [ident], x, x)
    fd = finite_diff_grad(
        lambda p: float(np.mean(phi(PhiKind.LOG, forward(p, x)[0]) + phi(PhiKind.LOG1M, forward(p, x)[0]))),
        d, 1e-5)
    assert rel_err(H.flat, fd.flat) <= 1e-4


def test_disc_grad_zero_network_symmetric(small_nets):
    g, _ = small_nets(3)
    d = MlpParams((4, 5, 1), np.zeros(4 * 5 + 5 + 5 + 1), "sigmoid")
    s = make_stream(3, "x")
    H = disc_ascent_grad(d, [g, g], s.normal((6, 4)), [s.normal((6, 3)), s.normal((6, 3))])
    assert np.all(np.abs(H.flat) < 1e-15)


def test_disc_grad_duplicate_generators(small_nets):
    g, d = small_nets(4)
    s = make_stream(4, "x")
    x, z = s.normal((6, 4)), s.normal((6, 3))
    one = disc_ascent_grad(d, [g], x, z)
    two = disc_ascent_grad(d, [g, g], x, [z, z])
    assert np.allclose(one.flat, two.flat, rtol=1e-12, atol=1e-15)


def test_disc_grad_needs_generators(small_nets):
    _, d = small_nets(0)
    with pytest.raises(ParameterError):
        disc_ascent_grad(d, [], np.ones((2, 4)), np.ones((2, 3)))


def test_minimax_pairing(small_nets):
    # with phi3 = -phi2 the generator's data term is minus the routed phi2 term
    g, d = small_nets(9)
    z = make_stream(9, "z").normal((5, 3))
    N, prior = 50, PriorSpec(3.0)
    data_term = gen_log_post_grad(g, d, z, N, prior, PhiKind.NEG_LOG1M).flat - prior.score(g.flat)
    routed_phi2 = N * gen_objective_grad(g, d, z, PhiKind.LOG1M).flat
    assert np.allclose(data_term, -routed_phi2, rtol=1e-12, atol=1e-14)


def test_objective_estimate_constant_disc():
    x = make_stream(0, "x").normal((8, 4))
    fake = make_stream(1, "x").normal((8, 4))
    assert disc_objective_estimate(constant_disc(4, 0.5), fake, x) == pytest.approx(-math.log(4), abs=1e-12)
    assert disc_objective_estimate(constant_disc(4, 0.9), fake, x) == pytest.approx(
        math.log(0.9) + math.log(0.1), abs=1e-12)


def test_objective_estimate_permutation_invariant(small_nets):
    _, d = small_nets(5)
    s = make_stream(5, "x")
    x, fake = s.normal((9, 4)), s.normal((7, 4))
    base = disc_objective_estimate(d, fake, x)
    perm = disc_objective_estimate(d, fake[s.permutation(7)], x[s.permutation(9)])
    assert perm == pytest.approx(base, rel=1e-13)
