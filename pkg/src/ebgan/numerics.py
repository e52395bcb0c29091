"""Seeded random streams and small dense linear-algebra helpers.

Every random draw in the package goes through an :class:`RngStream`. A stream
is keyed by an integer seed plus a label made of strings and integers, e.g.
``make_stream(seed, "gen", j, t)``, and is backed by numpy's counter-based
Philox bit generator. Streams never share state, so per-generator and
per-iteration streams can be derived independently and in any order.

Gaussian draws use numpy's ziggurat sampler (``Generator.standard_normal``).
"""

from __future__ import annotations

import hashlib
from typing import Union

import numpy as np

LabelPart = Union[str, int]


class ParameterError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class NumericDomainError(ArithmeticError):
    """Raised when a value falls outside the domain a function accepts."""


def _label_words(label: tuple[LabelPart, ...]) -> list[int]:
    text = "\x1f".join(f"{type(p).__name__}:{p}" for p in label)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """Single-owner random stream; a deterministic function of ``(seed, label)``."""

    def __init__(self, seed: int, *label: LabelPart):
        if not 0 <= int(seed) < 2**64:
            raise ParameterError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self.label = tuple(label)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=_label_words(self.label))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, label={self.label!r})"

    def normal(self, size, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        if std < 0:
            raise ParameterError(f"std must be >= 0, got {std}")
        z = self._gen.standard_normal(size)
        return mean + std * z

    def uniform(self, size) -> np.ndarray:
        return self._gen.random(size)

    def integers(self, high: int, size=None) -> np.ndarray:
        return self._gen.integers(0, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)``."""
        if not 1 <= k <= n:
            raise ParameterError(f"cannot draw {k} of {n} without replacement")
        return self._gen.choice(n, size=k, replace=False)


def make_stream(seed: int, *label: LabelPart) -> RngStream:
    return RngStream(seed, *label)


def sample_gaussian(stream: RngStream, rows: int, cols: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """``rows x cols`` matrix of independent N(mean, std^2) draws."""
    if std < 0:
        raise ParameterError(f"std must be >= 0, got {std}")
    return stream.normal((rows, cols), mean, std)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def check_finite(a: np.ndarray, what: str = "value") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NumericDomainError(f"non-finite entries in {what}")
    return a


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ParameterError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return check_finite(a @ b, "matmul result")


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ParameterError(f"shape mismatch: {a.shape} + {b.shape}")
    return check_finite(a + b, "add result")


def scale(a, s: float) -> np.ndarray:
    return check_finite(as_matrix(a) * float(s), "scale result")


def transpose(a) -> np.ndarray:
    return as_matrix(a).T.copy()
