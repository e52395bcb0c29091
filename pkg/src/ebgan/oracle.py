"""Brute-force checks of the equilibrium theory on discrete distributions.

``p`` plays the data distribution and ``q`` the mixture-generator
distribution, both as histograms over the same bins. ``0 * log 0`` is 0
throughout.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .numerics import ParameterError

LOG4 = math.log(4.0)


def as_histogram(p: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    h = np.asarray(p, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise ParameterError("histogram must be a non-empty 1-D sequence")
    if np.any(h < 0) or abs(h.sum() - 1.0) > tol:
        raise ParameterError(f"histogram must be nonnegative and sum to 1, sum={h.sum()!r}")
    return h


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p, q = as_histogram(p), as_histogram(q)
    if p.shape != q.shape:
        raise ParameterError(f"histograms differ in length: {p.size} vs {q.size}")
    return p, q


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(y)


def optimal_discriminator(p, q) -> np.ndarray:
    """Per-bin p / (p + q); empty bins get 0.5."""
    p, q = _pair(p, q)
    tot = p + q
    out = np.full(p.shape, 0.5)
    nz = tot > 0
    out[nz] = p[nz] / tot[nz]
    return out


def _bin_objective(pi: float, qi: float, d: float) -> float:
    # p log D + q log(1 - D), with -inf where a positive mass meets log 0
    if (pi > 0 and d <= 0.0) or (qi > 0 and d >= 1.0):
        return -math.inf
    return _xlogy(pi, d) + _xlogy(qi, 1.0 - d)


def bruteforce_max_Jd(p, q, grid_points: int = 1001, tol: float = 1e-8) -> np.ndarray:
    """Maximize p log D + q log(1 - D) bin by bin: grid scan, then ternary search.

    The per-bin objective is concave on [0, 1], so the ternary search on the
    bracket around the best grid point converges to the maximizer.
    """
    if grid_points < 3:
        raise ParameterError("grid_points must be >= 3")
    p, q = _pair(p, q)
    grid = np.linspace(0.0, 1.0, grid_points)
    out = np.empty(p.size)
    for i, (pi, qi) in enumerate(zip(p, q)):
        if pi == 0.0 and qi == 0.0:
            out[i] = 0.5
            continue
        vals = [_bin_objective(pi, qi, d) for d in grid]
        k = int(np.argmax(vals))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
        while hi - lo > tol:
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if _bin_objective(pi, qi, m1) < _bin_objective(pi, qi, m2):
                lo = m1
            else:
                hi = m2
        out[i] = 0.5 * (lo + hi)
    return out


def virtual_criterion(p, q) -> float:
    """C = sum_x p log(p / (p + q)) + q log(q / (p + q))."""
    p, q = _pair(p, q)
    total = 0.0
    for pi, qi in zip(p, q):
        s = pi + qi
        if s > 0:
            total += _xlogy(pi, pi / s) + _xlogy(qi, qi / s)
    return total


def mixing_path(q0, p, s: float) -> np.ndarray:
    q0, p = _pair(q0, p)
    q = (1.0 - s) * q0 + s * p
    return q / q.sum()


def sweep_minimum(p, q0, grid_points: int = 1001) -> tuple[float, float]:
    """Grid-minimize C(p, q(s)) along q(s) = (1 - s) q0 + s p, s in [0, 1]."""
    if grid_points < 2:
        raise ParameterError("grid_points must be >= 2")
    p, q0 = _pair(p, q0)
    s_grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([virtual_criterion(p, mixing_path(q0, p, s)) for s in s_grid])
    k = int(np.argmin(values))
    return float(s_grid[k]), float(values[k])


def random_histogram(rng: np.random.Generator, n_bins: int, sparse: float = 0.0) -> np.ndarray:
    """Dirichlet(1) histogram; each bin zeroed with probability ``sparse``."""
    h = rng.dirichlet(np.ones(n_bins))
    if sparse > 0:
        keep = rng.random(n_bins) >= sparse
        if not keep.any():
            keep[rng.integers(n_bins)] = True
        h = np.where(keep, h, 0.0)
        h /= h.sum()
    return h
