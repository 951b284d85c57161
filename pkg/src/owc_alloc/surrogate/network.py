"""
Feedforward network with 1-D convolution and dense layers, written with numpy

Activations flow as (batch, channels, length) through conv1d layers and as
(batch, width) through dense layers; a dense layer flattens its input and a
conv1d layer after a dense layer sees one channel.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..utils.errors import ConfigurationError, InvalidParameterError, NumericError

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "identity")
Params = List[Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class LayerSpec:
    kind: Literal["dense", "conv1d"]
    width: int
    kernel: int = 1
    activation: str = "relu"

    def __post_init__(self):
        if self.kind not in ("dense", "conv1d"):
            raise ConfigurationError(f"unknown layer kind '{self.kind}'", key="surrogate.arch")
        if self.width < 1:
            raise ConfigurationError(f"layer width must be at least 1, got {self.width}", key="surrogate.arch")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ConfigurationError(f"kernel width must be odd and positive, got {self.kernel}", key="surrogate.arch")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation '{self.activation}'", key="surrogate.arch")

    def to_token(self) -> str:
        if self.kind == "conv1d":
            return f"conv1d:{self.width}:{self.kernel}:{self.activation}"
        return f"dense:{self.width}:{self.activation}"


def parse_arch(arch: str, n_outputs: Optional[int] = None) -> List[LayerSpec]:
    """
    Parse "conv1d:16:3,conv1d:16:3,dense:64"

    Tokens are dense:<width>[:<activation>] and conv1d:<width>:<kernel>[:<activation>];
    hidden layers default to relu. When n_outputs is given an identity dense
    output layer is appended.
    """
    specs = []
    for token in filter(None, (part.strip() for part in arch.split(","))):
        parts = token.split(":")
        try:
            if parts[0] == "dense" and len(parts) in (2, 3):
                specs.append(LayerSpec("dense", int(parts[1]), 1, parts[2] if len(parts) == 3 else "relu"))
            elif parts[0] == "conv1d" and len(parts) in (3, 4):
                specs.append(LayerSpec("conv1d", int(parts[1]), int(parts[2]), parts[3] if len(parts) == 4 else "relu"))
            else:
                raise ConfigurationError(f"malformed layer '{token}'", key="surrogate.arch")
        except ValueError as e:
            raise ConfigurationError(f"malformed layer '{token}': {e}", key="surrogate.arch") from e
    if n_outputs is not None:
        specs.append(LayerSpec("dense", n_outputs, 1, "identity"))
    return specs


def format_arch(specs: Sequence[LayerSpec]) -> str:
    return ",".join(spec.to_token() for spec in specs)


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    """
    Layer specs and parameters plus the normalization the model was trained with

    params[i] is (W, b): W has shape (out, in) for dense layers and
    (out_channels, in_channels, kernel) for conv1d layers.
    """

    specs: List[LayerSpec]
    params: Params
    input_dim: int
    K: int = 0
    L: int = 0
    output_layout: str = "full"
    feature_min: Optional[np.ndarray] = None
    feature_max: Optional[np.ndarray] = None
    target_min: Optional[np.ndarray] = None
    target_max: Optional[np.ndarray] = None
    history: List[Tuple[int, float, float]] = field(default_factory=list)

    @property
    def output_dim(self) -> int:
        return self.specs[-1].width if self.specs[-1].kind == "dense" else self.specs[-1].width * self._lengths()[-1]

    def _lengths(self) -> List[int]:
        lengths, length = [], self.input_dim
        for spec in self.specs:
            length = length if spec.kind == "conv1d" else spec.width
            lengths.append(length)
        return lengths

    def with_params(self, params: Params, **changes) -> "SurrogateModel":
        return replace(self, params=[(W.copy(), b.copy()) for W, b in params], **changes)

    def normalize_inputs(self, x: np.ndarray) -> np.ndarray:
        if self.feature_min is None:
            return np.asarray(x, dtype=float)
        span = np.where(self.feature_max > self.feature_min, self.feature_max - self.feature_min, 1.0)
        return (np.asarray(x, dtype=float) - self.feature_min) / span

    def denormalize_outputs(self, y: np.ndarray) -> np.ndarray:
        if self.target_min is None:
            return np.asarray(y, dtype=float)
        span = np.where(self.target_max > self.target_min, self.target_max - self.target_min, 1.0)
        return np.asarray(y, dtype=float) * span + self.target_min

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Raw-unit outputs for raw-unit features, shape (batch, outputs) or (outputs,)"""
        features = np.asarray(features, dtype=float)
        single = features.ndim == 1
        _, out = forward(self, self.normalize_inputs(np.atleast_2d(features)))
        out = self.denormalize_outputs(out)
        return out[0] if single else out


def init_model(specs: Sequence[LayerSpec], input_dim: int, rng_seed: int = 0, **metadata) -> SurrogateModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases"""
    if input_dim < 1:
        raise ConfigurationError(f"input dimension must be positive, got {input_dim}", key="surrogate.arch")
    if not specs:
        raise ConfigurationError("the network needs at least one layer", key="surrogate.arch")

    rng = np.random.default_rng(rng_seed)
    params: Params = []
    channels, length = 1, input_dim
    for index, spec in enumerate(specs):
        if spec.kind == "conv1d":
            if spec.kernel > length:
                raise ConfigurationError(
                    f"layer {index}: kernel {spec.kernel} is wider than its input of length {length}",
                    key="surrogate.arch",
                )
            fan_in = channels * spec.kernel
            shape = (spec.width, channels, spec.kernel)
            channels = spec.width
        else:
            fan_in = channels * length
            shape = (spec.width, fan_in)
            channels, length = 1, spec.width
        bound = 1.0 / np.sqrt(fan_in)
        params.append((rng.uniform(-bound, bound, size=shape), np.zeros(spec.width)))

    return SurrogateModel(specs=list(specs), params=params, input_dim=input_dim, **metadata)


def _windows(x: np.ndarray, kernel: int) -> np.ndarray:
    """Zero-padded sliding windows of (batch, channels, length) -> (batch, channels, length, kernel)"""
    pad = kernel // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    return sliding_window_view(padded, kernel, axis=2)


def _conv_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    windows = _windows(x, W.shape[2])
    return np.einsum("bcpk,ock->bop", windows, W) + b[None, :, None], windows


def conv_transform(signal: Sequence[float], weights: Sequence[float], bias: float = 0.0) -> np.ndarray:
    """Same-length cross-correlation with zero padding plus a scalar bias"""
    signal = np.asarray(signal, dtype=float).reshape(-1)
    kernel = np.asarray(weights, dtype=float).reshape(-1)
    if signal.size == 0:
        raise InvalidParameterError("input signal is empty")
    if kernel.size == 0 or kernel.size % 2 == 0:
        raise InvalidParameterError(f"kernel width must be odd and positive, got {kernel.size}")
    if kernel.size > signal.size:
        raise InvalidParameterError("kernel is wider than the input")
    out, _ = _conv_forward(signal[None, None, :], kernel[None, None, :], np.array([bias]))
    return out[0, 0]


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    return np.maximum(z, 0.0) if activation == "relu" else z


def forward(model: SurrogateModel, x: np.ndarray) -> Tuple[List[dict], np.ndarray]:
    """
    Forward pass on normalized inputs of shape (batch, input_dim)

    Returns one cache entry per layer (input, pre-activation, output) for
    backpropagation, and the final output.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.input_dim:
        raise InvalidParameterError(f"input has {x.shape[1]} features, model expects {model.input_dim}")

    a = x[:, None, :]
    caches = []
    for index, (spec, (W, b)) in enumerate(zip(model.specs, model.params)):
        if spec.kind == "conv1d":
            if a.ndim == 2:
                a = a[:, None, :]
            z, windows = _conv_forward(a, W, b)
        else:
            a = a.reshape(len(a), -1)
            z, windows = a @ W.T + b, None
        out = _activate(z, spec.activation)
        if not np.all(np.isfinite(out)):
            raise NumericError("non-finite activation", layer=index)
        caches.append({"input": a, "z": z, "windows": windows})
        a = out
    return caches, a.reshape(len(a), -1)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean of squared differences over every component (and sample)"""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise InvalidParameterError(f"prediction shape {pred.shape} differs from target shape {target.shape}")
    if pred.size == 0:
        raise InvalidParameterError("empty prediction")
    return float(np.mean((pred - target) ** 2))


def compute_gradients(model: SurrogateModel, x: np.ndarray, y: np.ndarray) -> Tuple[float, Params]:
    """Batch MSE and its exact gradients for every (W, b)"""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if len(x) == 0:
        raise InvalidParameterError("empty batch")
    caches, out = forward(model, x)
    loss = mse_loss(out, y)

    grad = 2.0 * (out - y) / out.size
    grads: Params = [None] * len(model.specs)
    for index in reversed(range(len(model.specs))):
        spec = model.specs[index]
        W, _ = model.params[index]
        cache = caches[index]
        grad = grad.reshape(cache["z"].shape)
        if spec.activation == "relu":
            grad = grad * (cache["z"] > 0)

        if spec.kind == "conv1d":
            windows = cache["windows"]
            dW = np.einsum("bop,bcpk->ock", grad, windows)
            db = grad.sum(axis=(0, 2))
            d_windows = np.einsum("bop,ock->bcpk", grad, W)
            length = cache["input"].shape[2]
            kernel = W.shape[2]
            d_padded = np.zeros(cache["input"].shape[:2] + (length + kernel - 1,))
            for j in range(kernel):
                d_padded[:, :, j:j + length] += d_windows[..., j]
            grad = d_padded[:, :, kernel // 2:kernel // 2 + length]
        else:
            dW = grad.T @ cache["input"]
            db = grad.sum(axis=0)
            grad = grad @ W
        grads[index] = (dW, db)
    return loss, grads
