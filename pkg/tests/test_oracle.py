import math

import numpy as np
import pytest

from ebgan.numerics import ParameterError
from ebgan.oracle import (
    LOG4,
    as_histogram,
    bruteforce_max_Jd,
    optimal_discriminator,
    random_histogram,
    sweep_minimum,
    virtual_criterion,
)


def test_histogram_validation():
    with pytest.raises(ParameterError):
        as_histogram([0.5, 0.6])
    with pytest.raises(ParameterError):
        as_histogram([1.2, -0.2])
    with pytest.raises(ParameterError):
        optimal_discriminator([1.0], [0.5, 0.5])


def test_optimal_discriminator_examples():
    assert np.all(optimal_discriminator([0.25] * 4, [0.25] * 4) == 0.5)
    assert np.array_equal(optimal_discriminator([1, 0], [0, 1]), [1.0, 0.0])
    assert np.allclose(optimal_discriminator([0.75, 0.25], [0.25, 0.75]), [0.75, 0.25])
    assert optimal_discriminator([1, 0, 0], [0, 1, 0])[2] == 0.5


def test_bruteforce_uniform():
    p = np.full(8, 1 / 8)
    assert np.allclose(bruteforce_max_Jd(p, p), 0.5, atol=1e-6)


def test_bruteforce_single_bin_mass():
    p = np.array([1.0, 0, 0, 0])
    q = np.array([0.1, 0.2, 0.3, 0.4])
    D = bruteforce_max_Jd(p, q)
    assert D[0] == pytest.approx(1.0 / 1.1, abs=1e-6)
    assert np.allclose(D[1:], 0.0, atol=1e-6)


def test_bruteforce_matches_formula_random():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        p, q = random_histogram(rng, 8), random_histogram(rng, 8)
        assert np.max(np.abs(bruteforce_max_Jd(p, q) - optimal_discriminator(p, q))) <= 1e-6


def test_bruteforce_small_grid_rejected():
    with pytest.raises(ParameterError):
        bruteforce_max_Jd([1.0], [1.0], grid_points=2)


def test_virtual_criterion_examples():
    assert virtual_criterion([0.2, 0.8], [0.2, 0.8]) == pytest.approx(-LOG4, abs=1e-15)
    assert virtual_criterion([0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]) == 0.0
    expected = 2 * (0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert virtual_criterion([0.75, 0.25], [0.25, 0.75]) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(-1.1246703, abs=1e-7)


def test_virtual_criterion_lower_bound_and_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 17))
        p, q = random_histogram(rng, n, sparse=0.2), random_histogram(rng, n, sparse=0.2)
        c = virtual_criterion(p, q)
        assert c == pytest.approx(virtual_criterion(q, p), abs=1e-14)
        if np.max(np.abs(p - q)) > 1e-9:
            assert c > -LOG4
        else:
            assert c == pytest.approx(-LOG4, abs=1e-12)


def test_sweep_minimum_at_data():
    rng = np.random.default_rng(11)
    p, q0 = random_histogram(rng, 6), random_histogram(rng, 6)
    s_star, c_min = sweep_minimum(p, q0)
    assert s_star == 1.0
    assert c_min == pytest.approx(-LOG4, abs=1e-9)
    assert virtual_criterion(p, p) < virtual_criterion(p, q0)


def test_sweep_degenerate_path():
    p = [0.1, 0.2, 0.7]
    _, c_min = sweep_minimum(p, p)
    assert c_min == pytest.approx(-LOG4, abs=1e-12)
    for s in np.linspace(0, 1, 11):
        assert virtual_criterion(p, p) == pytest.approx(-LOG4, abs=1e-12)
