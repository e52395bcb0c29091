"""Synthetic 10-component mixture in 100 dimensions and batch sampling.

Each component j has a 2-D mean mu_j and a 100 x 2 map M_j; its rows are
(0.5 * N(0, I_2) + mu_j) @ M_j.T, and its centroid is mu_j @ M_j.T.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .numerics import ParameterError, RngStream, make_stream


@dataclass(frozen=True)
class MixtureSpec:
    K: int = 10
    d_latent: int = 2
    d_out: int = 100
    n_per_component: int = 1000
    mean_std: float = 5.0
    map_std: float = 5.0
    within_scale: float = 0.5
    seed: int = 1234

    def __post_init__(self):
        for name in ("K", "d_latent", "d_out", "n_per_component"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        for name in ("mean_std", "map_std", "within_scale"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")

    @property
    def N(self) -> int:
        return self.K * self.n_per_component


@dataclass(frozen=True)
class LatentSpec:
    d_z: int = 10
    distribution: str = "std_gaussian"

    def __post_init__(self):
        if self.d_z < 1:
            raise ParameterError("d_z must be >= 1")
        if self.distribution not in ("std_gaussian", "uniform01"):
            raise ParameterError(f"unknown latent distribution {self.distribution!r}")


@dataclass
class MixtureDataset:
    X: np.ndarray
    labels: np.ndarray
    spec: MixtureSpec
    means: np.ndarray = field(repr=False)       # K x d_latent
    maps: np.ndarray = field(repr=False)        # K x d_out x d_latent
    centroids: np.ndarray = field(repr=False)   # K x d_out

    @property
    def N(self) -> int:
        return self.X.shape[0]

    def component(self, j: int) -> np.ndarray:
        return self.X[self.labels == j]


def generate_mixture(spec: MixtureSpec) -> MixtureDataset:
    """Deterministic in ``spec``; rows are grouped by component in label order."""
    stream = make_stream(spec.seed, "mixture")
    means = stream.normal((spec.K, spec.d_latent), 0.0, spec.mean_std)
    maps = stream.normal((spec.K, spec.d_out, spec.d_latent), 0.0, spec.map_std)
    blocks, labels = [], []
    for j in range(spec.K):
        u = stream.normal((spec.n_per_component, spec.d_latent)) * spec.within_scale + means[j]
        blocks.append(u @ maps[j].T)
        labels.append(np.full(spec.n_per_component, j, dtype=np.int64))
    centroids = np.einsum("kl,kdl->kd", means, maps)
    return MixtureDataset(np.concatenate(blocks), np.concatenate(labels), spec, means, maps, centroids)


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine map x -> (x - mean) / scale fitted on a data matrix."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> Standardizer:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ParameterError("need a matrix with at least 2 rows")
        sd = X.std(axis=0)
        # constant columns are only centred
        return cls(X.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def invert(self, Y: np.ndarray) -> np.ndarray:
        return np.asarray(Y, dtype=np.float64) * self.scale + self.mean


def standardized_view(ds: MixtureDataset, st: Standardizer) -> MixtureDataset:
    """Same dataset in standardized coordinates (rows and centroids mapped, generating
    parameters kept as they are)."""
    return MixtureDataset(st.apply(ds.X), ds.labels, ds.spec, ds.means, ds.maps, st.apply(ds.centroids))


def minibatch(ds: MixtureDataset, n: int, stream: RngStream) -> np.ndarray:
    """``n`` distinct rows drawn uniformly."""
    if not 1 <= n <= ds.N:
        raise ParameterError(f"batch size must lie in [1, {ds.N}], got {n}")
    return ds.X[stream.choice(ds.N, n)]


def sample_latent(spec: LatentSpec, n: int, stream: RngStream) -> np.ndarray:
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if spec.distribution == "uniform01":
        return stream.uniform((n, spec.d_z))
    return stream.normal((n, spec.d_z))


def write_dataset_csv(ds: MixtureDataset, path) -> None:
    """Header ``x0..x{d-1},label``; values with 17 significant digits."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(ds.X.shape[1])] + ["label"])
        for row, lab in zip(ds.X, ds.labels):
            w.writerow([f"{v:.17g}" for v in row] + [int(lab)])


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        if header[-1] != "label":
            raise ParameterError(f"{path}: last column must be 'label'")
        rows = [row for row in r]
    X = np.array([[float(v) for v in row[:-1]] for row in rows])
    labels = np.array([int(row[-1]) for row in rows], dtype=np.int64)
    return X, labels
