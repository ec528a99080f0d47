"""The regression head: explicit forward/backward passes and Huber loss.

The head stacks, per hidden layer, an affine map followed by ReLU and
inverted dropout, then a final affine map to a single score in scale
space. The production configuration uses one 256-wide hidden layer (one
linear layer, one ReLU, one dropout on top of the pooled pair vector);
the frozen-architecture presets use three and two affine layers.

Everything is deterministic: weights come from a SplitMix64 stream
seeded by the config, and dropout masks are drawn from the same stream
during training. Evaluation mode draws nothing and is pure.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from ._rng import SplitMix64
from .corpus import descale_score
from .errors import CheckpointError, NumericError

__all__ = [
    "HeadConfig",
    "HeadModel",
    "head_preset",
    "init_head",
    "head_forward",
    "head_backward",
    "huber_loss",
    "predict_score",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass(frozen=True)
class HeadConfig:
    input_dim: int
    hidden_dims: tuple[int, ...] = (256,)
    dropout_p: float = 0.1
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        if self.input_dim < 1:
            raise CheckpointError(f"input_dim must be >= 1, got {self.input_dim}")
        if any(d < 1 for d in self.hidden_dims):
            raise CheckpointError(f"hidden dims must be positive: {self.hidden_dims}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise CheckpointError(f"dropout_p must lie in [0, 1), got {self.dropout_p}")

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per affine layer, chaining to a scalar output."""
        sizes = [self.input_dim, *self.hidden_dims, 1]
        return list(zip(sizes[:-1], sizes[1:]))


def head_preset(name: str, input_dim: int, seed: int = 42) -> HeadConfig:
    """Named architectures: production head and the two frozen variants.

    ``large-frozen`` is three affine layers with a (ReLU, dropout) block
    after the first two; ``base-frozen`` is two affine layers with one
    block; ``final`` is the production single-hidden-layer head.
    """
    presets = {
        "final": (256,),
        "base-frozen": (256,),
        "large-frozen": (256, 256),
    }
    if name not in presets:
        raise CheckpointError(f"unknown head preset {name!r}")
    return HeadConfig(input_dim=input_dim, hidden_dims=presets[name], seed=seed)


class HeadModel:
    """Weights plus the seeded stream that feeds dropout masks.

    Training (weight mutation, mask draws) is single-owner; eval-mode
    inference on a fixed model is safe to share.
    """

    def __init__(self, config: HeadConfig, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.config = config
        self.weights = weights
        self.biases = biases
        self._dropout_rng = SplitMix64(config.seed ^ 0xD0D0)

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def copy_parameters(self) -> list[np.ndarray]:
        return [p.copy() for p in self.parameters()]

    def load_parameters(self, params: Sequence[np.ndarray]) -> None:
        own = self.parameters()
        if len(own) != len(params):
            raise CheckpointError("parameter count mismatch")
        for dst, src in zip(own, params):
            if dst.shape != src.shape:
                raise CheckpointError(f"shape mismatch {dst.shape} vs {src.shape}")
            dst[...] = src


def init_head(config: HeadConfig) -> HeadModel:
    """Uniform ±sqrt(6/fan_in) weights from a seeded stream; zero biases."""
    rng = SplitMix64(config.seed)
    weights, biases = [], []
    for fan_in, fan_out in config.layer_dims():
        limit = (6.0 / fan_in) ** 0.5
        w = np.empty((fan_out, fan_in), dtype=np.float64)
        for i in range(fan_out):
            for j in range(fan_in):
                w[i, j] = limit * (2.0 * rng.next_unit() - 1.0)
        weights.append(w)
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return HeadModel(config, weights, biases)


def head_forward(model: HeadModel, x, train_mode: bool) -> tuple[float, list]:
    """Affine → ReLU → dropout per hidden layer; final affine to a scalar.

    Returns the raw prediction and the cache needed for the backward
    pass. Dropout only fires in train mode (inverted scaling 1/(1-p));
    eval mode is deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.input_dim,):
        raise NumericError(f"input has shape {x.shape}, expected ({model.config.input_dim},)")
    p = model.config.dropout_p
    cache: list = []
    h = x
    n_hidden = len(model.weights) - 1
    for layer in range(n_hidden):
        z = model.weights[layer] @ h + model.biases[layer]
        relu_mask = (z > 0.0).astype(np.float64)
        a = z * relu_mask
        if train_mode and p > 0.0:
            keep = np.empty(a.shape[0], dtype=np.float64)
            for i in range(a.shape[0]):
                keep[i] = 1.0 if model._dropout_rng.next_unit() >= p else 0.0
            drop_mask = keep / (1.0 - p)
        else:
            drop_mask = np.ones(a.shape[0], dtype=np.float64)
        cache.append((h, relu_mask, drop_mask))
        h = a * drop_mask
    cache.append((h, None, None))
    prediction = float((model.weights[-1] @ h + model.biases[-1])[0])
    return prediction, cache


def head_backward(model: HeadModel, cache: list, dloss: float) -> list[np.ndarray]:
    """Gradients for every parameter, ordered as model.parameters().

    Exact for the piecewise-linear stack given the masks frozen in the
    forward cache.
    """
    if len(cache) != len(model.weights):
        raise NumericError("stale cache: layer count mismatch")
    grads_w: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(model.biases)  # type: ignore[list-item]

    h_last = cache[-1][0]
    grads_w[-1] = dloss * h_last[np.newaxis, :]
    grads_b[-1] = np.array([dloss], dtype=np.float64)
    dh = dloss * model.weights[-1][0]

    for layer in range(len(model.weights) - 2, -1, -1):
        h_in, relu_mask, drop_mask = cache[layer]
        dz = dh * drop_mask * relu_mask
        grads_w[layer] = np.outer(dz, h_in)
        grads_b[layer] = dz
        if layer > 0:
            dh = model.weights[layer].T @ dz

    out: list[np.ndarray] = []
    for gw, gb in zip(grads_w, grads_b):
        out.append(gw)
        out.append(gb)
    return out


def huber_loss(y: float, yhat: float, delta: float) -> tuple[float, float]:
    """Huber loss and its derivative with respect to the prediction.

    Quadratic ½r² for |r| <= delta, linear delta(|r| - ½delta) beyond;
    r = y - yhat.
    """
    if delta <= 0:
        raise NumericError(f"delta must be positive, got {delta}")
    r = y - yhat
    if abs(r) <= delta:
        return 0.5 * r * r, -r
    return delta * (abs(r) - 0.5 * delta), -delta if r > 0 else delta


def predict_score(model: HeadModel, x, score_max: float) -> float:
    """Eval-mode forward, clipped to [0, 1], descaled to the grading scale."""
    raw, _ = head_forward(model, x, train_mode=False)
    clipped = min(1.0, max(0.0, raw))
    return descale_score(clipped, score_max)


# --- Checkpoints ----------------------------------------------------------------

_CKPT_FORMAT = "asag-head-ckpt v1"


def checkpoint_timestamp() -> str:
    """ISO-8601 UTC creation time; honors SOURCE_DATE_EPOCH so reruns with
    pinned seeds can produce byte-identical checkpoints."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(tz=timezone.utc).isoformat()


def save_checkpoint(model: HeadModel, path: str | Path, metadata: dict | None = None) -> None:
    """Self-describing JSON checkpoint; bytes are a function of model+metadata."""
    payload = {
        "format": _CKPT_FORMAT,
        "config": asdict(model.config),
        "metadata": metadata or {},
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), "utf-8")


def load_checkpoint(path: str | Path) -> tuple[HeadModel, dict]:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"missing checkpoint: {path}")
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path.name}: not a valid checkpoint: {exc}") from exc
    if payload.get("format") != _CKPT_FORMAT:
        raise CheckpointError(f"{path.name}: unknown checkpoint format {payload.get('format')!r}")
    raw_config = payload["config"]
    config = HeadConfig(
        input_dim=raw_config["input_dim"],
        hidden_dims=tuple(raw_config["hidden_dims"]),
        dropout_p=raw_config["dropout_p"],
        seed=raw_config["seed"],
    )
    if len(payload["layers"]) != len(config.layer_dims()):
        raise CheckpointError(
            f"{path.name}: {len(payload['layers'])} layers, config chains {len(config.layer_dims())}"
        )
    weights, biases = [], []
    for layer, (fan_in, fan_out) in zip(payload["layers"], config.layer_dims()):
        w = np.asarray(layer["weights"], dtype=np.float64)
        b = np.asarray(layer["biases"], dtype=np.float64)
        if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
            raise CheckpointError(
                f"{path.name}: layer shape {w.shape}/{b.shape} does not chain ({fan_out},{fan_in})"
            )
        weights.append(w)
        biases.append(b)
    if not all(np.isfinite(w).all() for w in weights) or not all(np.isfinite(b).all() for b in biases):
        raise CheckpointError(f"{path.name}: non-finite parameters")
    return HeadModel(config, weights, biases), payload.get("metadata", {})
