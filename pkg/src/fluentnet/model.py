"""Stutter detector: SE-ResNet front end, bidirectional recurrence, attention.

One network is a binary detector for a single disfluency type on 4 s
spectrogram clips; an ensemble of per-type detectors covers the full label
set. The input runs through eight squeeze-excitation residual blocks that
halve the frequency axis four times and the time axis twice, the frequency
axis is then averaged out, and two BLSTM layers plus global attention
summarize the time axis before a sigmoid unit scores the clip.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .container import read_container, write_container
from .features import compute_normalization
from .nn import (
    BlstmLayer,
    Dense,
    GlobalAttention,
    SEResNetBlock,
    Tensor,
    clamp,
    dropout,
    no_grad,
    sigmoid,
)

BASE_CHANNELS = (16, 16, 32, 32, 64, 64, 128, 128)
BLOCK_STRIDES = ((1, 1), (1, 2), (1, 1), (2, 2), (1, 1), (1, 2), (1, 1), (2, 2))

CHECKPOINT_KIND = "fluentnet_checkpoint"


@dataclass(frozen=True)
class FluentNetConfig:
    """Architecture knobs; width_scale shrinks channels and hidden size together."""

    width_scale: float = 1.0
    hidden: int = 512
    blstm_merge: str = "product"
    se_reduction: int = 16
    dropout: float = 0.2
    input_frames: int = 398
    input_bins: int = 256
    dtype: str = "float32"

    def __post_init__(self):
        if self.width_scale <= 0:
            raise ValueError("width_scale must be positive")
        if self.hidden < 1:
            raise ValueError("hidden must be at least 1")
        if self.blstm_merge not in ("product", "concat"):
            raise ValueError(f"unknown merge mode {self.blstm_merge!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.input_frames < 1 or self.input_bins < 1:
            raise ValueError("input dimensions must be positive")
        if np.dtype(self.dtype).kind != "f":
            raise ValueError(f"dtype must be a float type, got {self.dtype!r}")

    def channel_plan(self) -> list[int]:
        return [max(1, round(c * self.width_scale)) for c in BASE_CHANNELS]

    def hidden_size(self) -> int:
        return max(1, round(self.hidden * self.width_scale))


class FluentNet:
    """Binary detector scoring each clip for one disfluency type."""

    def __init__(self, config: FluentNetConfig, rng: np.random.Generator):
        self.config = config
        dt = np.dtype(config.dtype)
        self.blocks = []
        in_ch = 1
        for ch, stride in zip(config.channel_plan(), BLOCK_STRIDES):
            self.blocks.append(
                SEResNetBlock(rng, in_ch, ch, stride, config.se_reduction, dt))
            in_ch = ch
        hidden = config.hidden_size()
        self.blstm1 = BlstmLayer(rng, in_ch, hidden, config.blstm_merge, dt)
        self.blstm2 = BlstmLayer(rng, self.blstm1.out_dim, hidden,
                                 config.blstm_merge, dt)
        self.attention = GlobalAttention(rng, self.blstm2.out_dim, dt)
        self.head = Dense(rng, self.blstm2.out_dim, 1, bias=True, dtype=dt)
        # Per-bin input statistics travel with the weights so a saved model
        # scores raw clips without the training set.
        self.norm_mean = np.zeros(config.input_bins, dtype=dt)
        self.norm_std = np.ones(config.input_bins, dtype=dt)

    def set_normalization(self, mean: np.ndarray, std: np.ndarray) -> None:
        mean = np.asarray(mean)
        std = np.asarray(std)
        want = (self.config.input_bins,)
        if mean.shape != want or std.shape != want:
            raise ValueError(f"normalization arrays must have shape {want}")
        if np.any(std <= 0):
            raise ValueError("normalization std must be positive")
        self.norm_mean[...] = mean
        self.norm_std[...] = std

    def forward(self, clips: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        """Score (n, frames, bins) clips; returns an (n,) probability tensor."""
        x = np.asarray(clips)
        want = (self.config.input_frames, self.config.input_bins)
        if x.ndim != 3 or x.shape[1:] != want:
            raise ValueError(f"expected (n, {want[0]}, {want[1]}) clips, got {x.shape}")
        if training and self.config.dropout > 0.0 and rng is None:
            raise ValueError("training with dropout needs a random generator")
        z = ((x - self.norm_mean) / self.norm_std).astype(self.norm_mean.dtype)
        t = Tensor(z[:, None, :, :])
        for block in self.blocks:
            t = block(t, training)
        t = t.mean(axis=3)        # collapse frequency: (n, c, t)
        t = t.transpose(0, 2, 1)  # (n, t, c)
        t = dropout(self.blstm1(t), self.config.dropout, rng, training)
        t = dropout(self.blstm2(t), self.config.dropout, rng, training)
        summary, _ = self.attention(t)
        return sigmoid(self.head(summary)).reshape(x.shape[0])

    def _children(self):
        named = [(f"block{i + 1}", b) for i, b in enumerate(self.blocks)]
        named += [("blstm1", self.blstm1), ("blstm2", self.blstm2),
                  ("attention", self.attention), ("head", self.head)]
        return named

    def parameters(self) -> list[tuple[str, Tensor]]:
        return [(f"{cn}.{n}", t) for cn, child in self._children()
                for n, t in child.parameters()]

    def state(self) -> list[tuple[str, np.ndarray]]:
        out = [(f"{cn}.{n}", a) for cn, child in self._children()
               for n, a in child.state()]
        out += [("norm_mean", self.norm_mean), ("norm_std", self.norm_std)]
        return out


def bce_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean binary cross-entropy; probabilities clipped to [1e-7, 1 - 1e-7]."""
    y = np.asarray(target, dtype=pred.dtype)
    if y.shape != pred.shape:
        raise ValueError(f"target shape {y.shape} does not match {pred.shape}")
    p = clamp(pred, 1e-7, 1.0 - 1e-7)
    yt = Tensor(y)
    return -((p.log() * yt + (1.0 - p).log() * (1.0 - yt)).mean())


def rmsprop_step(params: list[tuple[str, Tensor]], velocities: dict[str, np.ndarray],
                 lr: float = 1e-4, rho: float = 0.9, eps: float = 1e-7) -> None:
    """In place: v <- rho v + (1-rho) g^2; theta <- theta - lr g / (sqrt(v) + eps)."""
    for name, t in params:
        if t.grad is None:
            continue
        g = t.grad
        v = velocities.get(name)
        if v is None:
            v = np.zeros_like(t.data)
            velocities[name] = v
        v *= rho
        v += (1.0 - rho) * g * g
        t.data -= lr * g / (np.sqrt(v) + eps)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    epochs: int = 30
    batch_size: int = 16
    max_neg_ratio: float | None = 4.0
    target_acc: float | None = None

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1")
        if self.max_neg_ratio is not None and self.max_neg_ratio <= 0:
            raise ValueError("max_neg_ratio must be positive or None")
        if self.target_acc is not None and not 0.0 < self.target_acc <= 1.0:
            raise ValueError("target_acc must be in (0, 1]")


def downsample_indices(labels: np.ndarray, max_neg_ratio: float | None,
                       rng: np.random.Generator) -> np.ndarray:
    """Sorted indices keeping all positives and at most ratio-times negatives."""
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if max_neg_ratio is not None and pos.size > 0:
        cap = int(max_neg_ratio * pos.size)
        if neg.size > cap:
            neg = rng.choice(neg, size=cap, replace=False)
    return np.sort(np.concatenate([pos, neg]))


def train_detector(model: FluentNet, features: np.ndarray, labels: np.ndarray,
                   config: TrainConfig, rng: np.random.Generator) -> list[dict]:
    """Fit the detector; returns one {"epoch", "loss", "acc"} record per epoch.

    Negatives beyond max_neg_ratio times the positive count are dropped by a
    seeded draw before training. Normalization statistics come from the kept
    examples and are stored on the model. Stops early once an epoch's
    training accuracy reaches target_acc.
    """
    features = np.asarray(features)
    labels = np.asarray(labels)
    if features.ndim != 3 or features.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n, frames, bins) aligned with labels")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")

    keep = downsample_indices(labels, config.max_neg_ratio, rng)
    if keep.size == 0:
        raise ValueError("no training examples")
    x = features[keep]
    y = labels[keep].astype(np.float64)

    mean, std = compute_normalization(x)
    model.set_normalization(mean, std)

    params = model.parameters()
    velocities: dict[str, np.ndarray] = {}
    history: list[dict] = []
    n = x.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            for _, t in params:
                t.grad = None
            pred = model.forward(x[batch], training=True, rng=rng)
            loss = bce_loss(pred, y[batch])
            loss.backward()
            rmsprop_step(params, velocities, config.lr)
            total_loss += loss.item() * batch.size
            correct += int(((pred.data >= 0.5) == (y[batch] == 1.0)).sum())
            # the graph pins a batch of activations; release before the next
            pred = loss = None
        record = {"epoch": epoch, "loss": total_loss / n, "acc": correct / n}
        history.append(record)
        if config.target_acc is not None and record["acc"] >= config.target_acc:
            break
    return history


def predict(model: FluentNet, features: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Eval-mode probabilities for (n, frames, bins) clips, without a graph."""
    features = np.asarray(features)
    out = np.empty(features.shape[0], dtype=np.float64)
    with no_grad():
        for start in range(0, features.shape[0], batch_size):
            chunk = features[start:start + batch_size]
            out[start:start + chunk.shape[0]] = model.forward(chunk).data
    return out


def save_checkpoint(path: str | Path, model: FluentNet) -> None:
    header = {"kind": CHECKPOINT_KIND, "config": asdict(model.config)}
    arrays: dict[str, np.ndarray] = {}
    for name, t in model.parameters():
        arrays["param." + name] = t.data
    for name, a in model.state():
        arrays["state." + name] = a
    write_container(path, header, arrays)


def load_checkpoint(path: str | Path) -> FluentNet:
    header, arrays = read_container(path)
    if header.get("kind") != CHECKPOINT_KIND:
        raise ValueError(f"{path}: not a detector checkpoint")
    config = FluentNetConfig(**header["config"])
    model = FluentNet(config, np.random.default_rng(0))
    for name, t in model.parameters():
        arr = arrays.get("param." + name)
        if arr is None:
            raise ValueError(f"{path}: missing array param.{name}")
        if arr.shape != t.data.shape:
            raise ValueError(f"{path}: shape mismatch for param.{name}")
        t.data = arr.astype(t.data.dtype, copy=False)
    for name, buf in model.state():
        arr = arrays.get("state." + name)
        if arr is None:
            raise ValueError(f"{path}: missing array state.{name}")
        if arr.shape != buf.shape:
            raise ValueError(f"{path}: shape mismatch for state.{name}")
        buf[...] = arr
    return model
