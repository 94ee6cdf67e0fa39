"""Float32 tensor math and the classifier head forward pass.

The head is the fine-tuned top of a frozen vision backbone: batch norm
over pooled features, dropout, a hidden dense layer with ReLU, dropout
again, and a dense output layer with per-class sigmoid scores. Dropout
layers are active only when explicit masks are supplied, so evaluation
mode is the default and needs no rescaling (inverted dropout).

All operations are pure; models are frozen dataclasses and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ShapeError, ValidationError


def ftensor(values, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Validating constructor for float32 tensors.

    Rejects non-finite values and, when `shape` is given, any element-count
    mismatch.
    """
    arr = np.asarray(values, dtype=np.float32)
    if shape is not None:
        if int(np.prod(shape)) != arr.size:
            raise ShapeError(f"cannot view {arr.size} values as shape {shape}")
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains non-finite values")
    return arr


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    x = np.asarray(x, dtype=np.float32)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_ACTIVATIONS = {
    "none": lambda y: y,
    "relu": lambda y: np.maximum(y, np.float32(0.0)),
    "sigmoid": sigmoid,
}


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, activation: str = "none") -> np.ndarray:
    """y[j] = act(sum_i x[i] * w[i, j] + b[j]) in float32."""
    if activation not in _ACTIVATIONS:
        raise ValidationError(f"unknown activation {activation!r}")
    x = ftensor(x)
    w = np.asarray(w, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if x.ndim != 1 or w.ndim != 2 or b.ndim != 1:
        raise ShapeError("dense_forward expects x[n], w[n,m], b[m]")
    if w.shape[0] != x.shape[0] or w.shape[1] != b.shape[0]:
        raise ShapeError(f"shapes do not conform: x{x.shape} w{w.shape} b{b.shape}")
    y = x @ w + b
    return _ACTIVATIONS[activation](y)


@dataclass(frozen=True)
class DropoutMask:
    """A realized dropout mask: which units survive, and the survivor scale."""

    keep: np.ndarray  # bool, one entry per unit
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0):
            raise ValidationError(f"dropout probability must be in [0, 1), got {self.p}")

    @property
    def scale(self) -> float:
        return 1.0 / (1.0 - self.p)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.keep.shape != x.shape:
            raise ShapeError(f"mask width {self.keep.shape} does not match activation {x.shape}")
        return np.where(self.keep, x * np.float32(self.scale), np.float32(0.0))


def draw_mask(width: int, p: float, rng: np.random.Generator) -> DropoutMask | None:
    """Sample a dropout mask; None for p == 0 (identity, no RNG consumed)."""
    if not (0.0 <= p < 1.0):
        raise ValidationError(f"dropout probability must be in [0, 1), got {p}")
    if p == 0.0:
        return None
    return DropoutMask(keep=rng.random(width) >= p, p=p)


def apply_dropout(x: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted dropout: zero each element with probability p, scale survivors by 1/(1-p)."""
    x = ftensor(x)
    mask = draw_mask(x.shape[0], p, rng)
    return x if mask is None else mask.apply(x)


@dataclass(frozen=True)
class BatchNorm:
    """Inference-time batch norm: a per-feature affine map."""

    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    epsilon: float = 1e-3

    def __post_init__(self):
        widths = {self.gamma.shape, self.beta.shape, self.mean.shape, self.var.shape}
        if len(widths) != 1 or self.gamma.ndim != 1:
            raise ShapeError("batch norm parameter vectors must share one width")
        if np.any(self.var + self.epsilon <= 0):
            raise ValidationError("running_var + epsilon must be positive")

    @property
    def width(self) -> int:
        return self.gamma.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        inv = self.gamma / np.sqrt(self.var + np.float32(self.epsilon))
        return (x - self.mean) * inv + self.beta

    @classmethod
    def identity(cls, width: int) -> "BatchNorm":
        one = np.ones(width, dtype=np.float32)
        zero = np.zeros(width, dtype=np.float32)
        return cls(gamma=one, beta=zero, mean=zero, var=one, epsilon=0.0)

    def is_identity(self) -> bool:
        return (
            self.epsilon == 0.0
            and np.all(self.gamma == 1.0)
            and np.all(self.beta == 0.0)
            and np.all(self.mean == 0.0)
            and np.all(self.var == 1.0)
        )


@dataclass(frozen=True)
class HeadModel:
    """The float classifier head: BN -> drop -> dense/ReLU -> drop -> dense/sigmoid."""

    bn: BatchNorm
    dropout1: float
    w1: np.ndarray  # feature_dim x hidden_dim
    b1: np.ndarray
    dropout2: float
    w2: np.ndarray  # hidden_dim x num_classes
    b2: np.ndarray

    def __post_init__(self):
        if self.w1.ndim != 2 or self.w2.ndim != 2:
            raise ShapeError("weight matrices must be 2-D")
        if self.bn.width != self.w1.shape[0]:
            raise ShapeError("batch norm width must match dense1 input dim")
        if self.b1.shape != (self.w1.shape[1],) or self.b2.shape != (self.w2.shape[1],):
            raise ShapeError("bias widths must match weight columns")
        if self.w1.shape[1] != self.w2.shape[0]:
            raise ShapeError("dense1 output dim must match dense2 input dim")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("model weights contain non-finite values")
        for p in (self.dropout1, self.dropout2):
            if not (0.0 <= p < 1.0):
                raise ValidationError(f"dropout probability must be in [0, 1), got {p}")

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]


def batchnorm_fold(bn: BatchNorm, w: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold an affine BN into the dense layer that follows it.

    Returns (w', b') with dense'(x) == dense(bn(x)) for all x:
        w'[i, j] = w[i, j] * gamma[i] / sqrt(var[i] + eps)
        b'[j]    = b[j] + sum_i w[i, j] * (beta[i] - gamma[i] * mean[i] / sqrt(var[i] + eps))
    """
    if bn.width != w.shape[0]:
        raise ShapeError("batch norm width must match dense input dim")
    inv = (bn.gamma / np.sqrt(bn.var + np.float32(bn.epsilon))).astype(np.float32)
    shift = (bn.beta - inv * bn.mean).astype(np.float32)
    w_folded = (w * inv[:, None]).astype(np.float32)
    b_folded = (b + shift @ w).astype(np.float32)
    return w_folded, b_folded


def fold_head(model: HeadModel) -> HeadModel:
    """Head with BN folded into dense1; forward pass unchanged in eval mode."""
    w1f, b1f = batchnorm_fold(model.bn, model.w1, model.b1)
    return replace(model, bn=BatchNorm.identity(model.feature_dim), w1=w1f, b1=b1f)


Masks = tuple[DropoutMask | None, DropoutMask | None]


def head_forward(model: HeadModel, features: np.ndarray, masks: Masks | None = None) -> np.ndarray:
    """Per-class sigmoid scores for one feature vector.

    With `masks` absent the dropout layers are identity (evaluation mode).
    """
    features = ftensor(features)
    if features.shape != (model.feature_dim,):
        raise ShapeError(f"expected features of length {model.feature_dim}, got {features.shape}")
    m1, m2 = masks if masks is not None else (None, None)
    x = model.bn.forward(features).astype(np.float32)
    if m1 is not None:
        x = m1.apply(x)
    h = dense_forward(x, model.w1, model.b1, "relu")
    if m2 is not None:
        h = m2.apply(h)
    return dense_forward(h, model.w2, model.b2, "sigmoid")
