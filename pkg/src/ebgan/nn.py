"""Fully connected ReLU networks with hand-written forward and backward passes.

Parameters live in one flat float64 vector; ``weights[l]`` (out x in) and
``biases[l]`` are views into it. Samplers and optimizers can then update a
whole network with single vector operations.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .numerics import ParameterError, RngStream

OUTPUT_ACTIVATIONS = ("sigmoid", "identity", "tanh")
HIDDEN_ACTIVATIONS = ("relu",)


def _param_count(sizes: Sequence[int]) -> int:
    return sum(o * i + o for i, o in zip(sizes[:-1], sizes[1:]))


@dataclass
class MlpParams:
    layer_sizes: tuple[int, ...]
    flat: np.ndarray
    output_activation: str = "sigmoid"
    hidden_activation: str = "relu"
    weights: list[np.ndarray] = field(init=False, repr=False, compare=False)
    biases: list[np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ParameterError(f"need >= 2 positive layer sizes, got {self.layer_sizes}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ParameterError(f"unknown output activation {self.output_activation!r}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ParameterError(f"unknown hidden activation {self.hidden_activation!r}")
        self.flat = np.asarray(self.flat, dtype=np.float64)
        if self.flat.shape != (_param_count(self.layer_sizes),):
            raise ParameterError(
                f"flat vector has shape {self.flat.shape}, layers {self.layer_sizes} "
                f"need {_param_count(self.layer_sizes)}"
            )
        self.weights, self.biases = [], []
        pos = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            self.weights.append(self.flat[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in))
            pos += fan_in * fan_out
            self.biases.append(self.flat[pos:pos + fan_out])
            pos += fan_out

    @property
    def size(self) -> int:
        return self.flat.size

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    def like(self, flat: np.ndarray | None = None) -> MlpParams:
        """Same architecture, new values (zeros when ``flat`` is None)."""
        values = np.zeros_like(self.flat) if flat is None else np.asarray(flat, dtype=np.float64)
        return MlpParams(self.layer_sizes, values, self.output_activation, self.hidden_activation)

    def copy(self) -> MlpParams:
        return self.like(self.flat.copy())

    def same_shape(self, other: MlpParams) -> bool:
        return self.layer_sizes == other.layer_sizes


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]   # input to each layer (X, then hidden activations)
    pre: list[np.ndarray]      # pre-activations per layer
    output: np.ndarray
    layer_sizes: tuple[int, ...]


INIT_SCHEMES = ("gaussian", "uniform")


def init_mlp(layer_sizes: Sequence[int], output_activation: str, init_std: float,
             stream: RngStream, scheme: str = "gaussian") -> MlpParams:
    """Random initial parameters.

    ``gaussian``: weights ~ N(0, init_std^2 / fan_in), biases zero.
    ``uniform``: weights and biases ~ U(-b, b) with b = init_std / sqrt(fan_in)
    (init_std = 1 is the common deep-learning framework default for dense layers).
    """
    if not layer_sizes:
        raise ParameterError("empty layer list")
    if init_std <= 0:
        raise ParameterError(f"init_std must be > 0, got {init_std}")
    if scheme not in INIT_SCHEMES:
        raise ParameterError(f"unknown init scheme {scheme!r}")
    params = MlpParams(tuple(layer_sizes), np.zeros(_param_count(layer_sizes)), output_activation)
    for w, b in zip(params.weights, params.biases):
        bound = init_std / np.sqrt(w.shape[1])
        if scheme == "gaussian":
            w[...] = stream.normal(w.shape, 0.0, bound)
        else:
            w[...] = (2.0 * stream.uniform(w.shape) - 1.0) * bound
            b[...] = (2.0 * stream.uniform(b.shape) - 1.0) * bound
    return params


def sigmoid(a: np.ndarray) -> np.ndarray:
    # two-branch form avoids overflow in exp for large |a|
    a = np.asarray(a, dtype=np.float64)
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _activate(name: str, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(a, 0.0)
    if name == "sigmoid":
        return sigmoid(a)
    if name == "tanh":
        return np.tanh(a)
    return a


def _activation_grad(name: str, a: np.ndarray, y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    if name == "relu":
        return dy * (a > 0)  # subgradient 0 at a == 0
    if name == "sigmoid":
        return dy * y * (1.0 - y)
    if name == "tanh":
        return dy * (1.0 - y * y)
    return dy


def forward(params: MlpParams, X: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.layer_sizes[0]:
        raise ParameterError(f"input shape {X.shape} does not match input width {params.layer_sizes[0]}")
    inputs, pre = [], []
    h = X
    last = params.n_layers - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        a = h @ w.T + b
        pre.append(a)
        h = _activate(params.output_activation if l == last else params.hidden_activation, a)
    return h, ForwardCache(inputs, pre, h, params.layer_sizes)


def backward(params: MlpParams, cache: ForwardCache, dY: np.ndarray,
             param_grads: bool = True, pre_activation: bool = False) -> tuple[MlpParams | None, np.ndarray]:
    """Reverse-mode gradients of ``sum(dY * Y)``, summed over the batch.

    With ``pre_activation=True``, ``dY`` is the cotangent of the output
    layer's pre-activation (the logit) instead of its activation. Losses on a
    sigmoid output use this to stay exact when the sigmoid saturates.
    With ``param_grads=False`` only the input gradient is computed.
    """
    if cache.layer_sizes != params.layer_sizes:
        raise ParameterError("cache was produced by a different architecture")
    dY = np.asarray(dY, dtype=np.float64)
    if dY.shape != cache.output.shape:
        raise ParameterError(f"dY shape {dY.shape} != output shape {cache.output.shape}")
    grads = params.like() if param_grads else None
    last = params.n_layers - 1
    g = dY
    y = cache.output
    for l in range(last, -1, -1):
        act = params.output_activation if l == last else params.hidden_activation
        y_l = y if l == last else cache.inputs[l + 1]
        if l == last and pre_activation:
            da = g
        else:
            da = _activation_grad(act, cache.pre[l], y_l, g)
        if grads is not None:
            np.matmul(da.T, cache.inputs[l], out=grads.weights[l])
            grads.biases[l][...] = da.sum(axis=0)
        g = da @ params.weights[l]
    return grads, g


def with_input_affine(params: MlpParams, shift: np.ndarray, scale: np.ndarray) -> MlpParams:
    """Network computing ``f((x - shift) / scale)``, folded into the first layer."""
    shift, scale = np.asarray(shift, dtype=np.float64), np.asarray(scale, dtype=np.float64)
    if shift.shape != (params.layer_sizes[0],) or scale.shape != shift.shape or np.any(scale <= 0):
        raise ParameterError("shift/scale must match the input width and scale must be positive")
    out = params.copy()
    out.weights[0][...] = params.weights[0] / scale
    out.biases[0][...] = params.biases[0] - out.weights[0] @ shift
    return out


def with_output_affine(params: MlpParams, shift: np.ndarray, scale: np.ndarray) -> MlpParams:
    """Network computing ``scale * f(x) + shift``; needs an identity output layer."""
    if params.output_activation != "identity":
        raise ParameterError("output affine folding needs an identity output activation")
    shift, scale = np.asarray(shift, dtype=np.float64), np.asarray(scale, dtype=np.float64)
    if shift.shape != (params.layer_sizes[-1],) or scale.shape != shift.shape:
        raise ParameterError("shift/scale must match the output width")
    out = params.copy()
    out.weights[-1][...] = params.weights[-1] * scale[:, None]
    out.biases[-1][...] = params.biases[-1] * scale + shift
    return out


def finite_diff_grad(loss: Callable[[MlpParams], float], params: MlpParams, h: float = 1e-5) -> MlpParams:
    """Central-difference gradient, one parameter at a time."""
    if h <= 0:
        raise ParameterError(f"h must be > 0, got {h}")
    probe = params.copy()
    out = np.empty(params.size)
    for k in range(params.size):
        orig = probe.flat[k]
        probe.flat[k] = orig + h
        up = loss(probe)
        probe.flat[k] = orig - h
        down = loss(probe)
        probe.flat[k] = orig
        out[k] = (up - down) / (2.0 * h)
    return params.like(out)


# Checkpoint layout, version 1:
#   8 bytes  magic b"EBGANMLP"
#   4 bytes  little-endian uint32 format version
#   4 bytes  little-endian uint32 header length H
#   H bytes  UTF-8 JSON header {"layer_sizes", "output_activation", "hidden_activation", "count"}
#   8*count  little-endian float64 parameters, layer by layer: W (row-major, out x in) then b
CHECKPOINT_MAGIC = b"EBGANMLP"
CHECKPOINT_VERSION = 1


def save_checkpoint(params: MlpParams, path) -> None:
    header = json.dumps({
        "layer_sizes": list(params.layer_sizes),
        "output_activation": params.output_activation,
        "hidden_activation": params.hidden_activation,
        "count": params.size,
    }, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(header)))
        f.write(header)
        f.write(params.flat.astype("<f8").tobytes())


def load_checkpoint(path) -> MlpParams:
    raw = Path(path).read_bytes()
    if raw[:8] != CHECKPOINT_MAGIC:
        raise ParameterError(f"{path}: not an MLP checkpoint")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != CHECKPOINT_VERSION:
        raise ParameterError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    flat = np.frombuffer(raw[16 + hlen:], dtype="<f8").astype(np.float64)
    if flat.size != header["count"]:
        raise ParameterError(f"{path}: truncated checkpoint")
    return MlpParams(tuple(header["layer_sizes"]), flat, header["output_activation"],
                     header["hidden_activation"])
