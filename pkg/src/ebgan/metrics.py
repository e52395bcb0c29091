"""Convergence, projection and mode-coverage measurements on trained models."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .data import MixtureDataset
from .nn import MlpParams, forward
from .numerics import ParameterError


class DegenerateDataError(ValueError):
    pass


def disc_means(theta_d: MlpParams, real_eval: np.ndarray, fake_eval: np.ndarray) -> tuple[float, float]:
    if real_eval.shape[0] < 1 or fake_eval.shape[0] < 1:
        raise ParameterError("evaluation sets must be non-empty")
    return float(np.mean(forward(theta_d, real_eval)[0])), float(np.mean(forward(theta_d, fake_eval)[0]))


@dataclass
class Pca2Projection:
    mean: np.ndarray
    directions: np.ndarray          # 2 x d, orthonormal rows
    explained_variance: np.ndarray  # (2,), nonincreasing


def pca2(real_data: np.ndarray) -> Pca2Projection:
    """Top two eigenvectors of the sample covariance.

    Each direction's sign is fixed so its largest-magnitude entry is positive.
    """
    X = np.asarray(real_data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise ParameterError("pca2 needs a matrix with at least 3 rows")
    mean = X.mean(axis=0)
    C = np.cov(X - mean, rowvar=False, ddof=1).reshape(X.shape[1], X.shape[1])
    vals, vecs = np.linalg.eigh(C)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if vals.size < 2 or vals[1] <= 1e-12 * max(vals[0], 1e-300):
        raise DegenerateDataError("covariance has fewer than two positive eigenvalues")
    dirs = vecs[:, :2].T.copy()
    for k in range(2):
        if dirs[k, np.argmax(np.abs(dirs[k]))] < 0:
            dirs[k] = -dirs[k]
    return Pca2Projection(mean, dirs, vals[:2].copy())


def project(projection: Pca2Projection, X: np.ndarray) -> np.ndarray:
    return (np.asarray(X, dtype=np.float64) - projection.mean) @ projection.directions.T


@dataclass
class CoverageReport:
    fractions: list[float]
    covered: list[bool]
    covered_count: int
    median_distance: list[float]
    radius: list[float]
    min_fraction: float
    radius_quantile: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d2, 0.0)


def mode_coverage(fake: np.ndarray, ds: MixtureDataset, min_fraction: float = 0.02,
                  radius_quantile: float = 0.95) -> CoverageReport:
    """Nearest-centroid assignment of fake rows, then a per-component coverage test.

    Component j is covered when at least ``min_fraction`` of the fakes are
    assigned to it and their median distance to its centroid is within the
    ``radius_quantile`` quantile of the real rows' distances to that centroid.
    """
    fake = np.asarray(fake, dtype=np.float64)
    if fake.ndim != 2 or fake.shape[0] < 1:
        raise ParameterError("fake samples must be a non-empty matrix")
    if not 0 < min_fraction < 1 or not 0 < radius_quantile < 1:
        raise ParameterError("min_fraction and radius_quantile must lie in (0, 1)")
    K = ds.centroids.shape[0]
    d2 = _sq_distances(fake, ds.centroids)
    assign = np.argmin(d2, axis=1)
    fractions, covered, medians, radii = [], [], [], []
    for j in range(K):
        real_d = np.linalg.norm(ds.component(j) - ds.centroids[j], axis=1)
        radius = float(np.quantile(real_d, radius_quantile))
        mine = assign == j
        frac = float(mine.mean())
        med = float(np.median(np.sqrt(d2[mine, j]))) if mine.any() else float("inf")
        fractions.append(frac)
        medians.append(med)
        radii.append(radius)
        covered.append(bool(frac >= min_fraction and med <= radius))
    return CoverageReport(fractions, covered, int(sum(covered)), medians, radii, min_fraction, radius_quantile)


def posterior_average(values: Sequence[float]) -> float:
    """(1/T) sum_t psi(theta_t) over retained iterations."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ParameterError("need at least one value")
    return float(v.mean())


def write_pca_points(path, projection: Pca2Projection, real: np.ndarray, real_labels: np.ndarray,
                     fake: np.ndarray, fake_labels: np.ndarray) -> None:
    """Columns x, y, source (real|fake), component (nearest-centroid index for fakes)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x", "y", "source", "component"])
        for source, X, labels in (("real", real, real_labels), ("fake", fake, fake_labels)):
            for (x, y), lab in zip(project(projection, X), labels):
                w.writerow([f"{x:.17g}", f"{y:.17g}", source, int(lab)])


def nearest_component(X: np.ndarray, ds: MixtureDataset) -> np.ndarray:
    return np.argmin(_sq_distances(np.asarray(X, dtype=np.float64), ds.centroids), axis=1)
