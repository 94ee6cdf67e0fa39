"""Post-training uint8 affine quantization of the head and integer inference.

Scheme: per-tensor asymmetric quantization onto [0, 255], so a real value
r and its code q satisfy r ~= scale * (q - zero_point). Ranges come from
exact min/max calibration (no clipping) over a representative feature set,
with the range always stretched to contain 0 so that 0.0 has an exact
code. Biases are stored as int32 at scale input_scale * weight_scale;
ReLU and sigmoid are realized as 256-entry uint8 lookup tables.

Rounding everywhere is round-to-nearest with ties away from zero, and the
requantization multiplier is applied in float; both choices are applied
uniformly so quantize/requantize stay mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError
from .nets import HeadModel, Masks, ftensor, sigmoid

QMIN, QMAX = 0, 255
INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (np.round rounds ties to even)."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


@dataclass(frozen=True)
class QuantParams:
    scale: float
    zero_point: int

    def __post_init__(self):
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise ValidationError(f"scale must be positive and finite, got {self.scale}")
        if not (QMIN <= self.zero_point <= QMAX):
            raise ValidationError(f"zero_point must be in [{QMIN}, {QMAX}], got {self.zero_point}")


def params_from_range(lo: float, hi: float) -> QuantParams:
    """Derive (scale, zero_point) from an observed real range.

    The range is stretched to include 0.0 so zero is exactly representable;
    a range too narrow to give a positive scale (all-zero activations, or a
    width that underflows) is widened to at least [-0.5, 0.5].
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ValidationError(f"invalid range [{lo}, {hi}]")
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    if (hi - lo) / (QMAX - QMIN) == 0.0:
        lo, hi = lo - 0.5, hi + 0.5
    scale = (hi - lo) / (QMAX - QMIN)
    zero_point = int(round_half_away(np.asarray(QMIN - lo / scale)))
    return QuantParams(scale=scale, zero_point=int(np.clip(zero_point, QMIN, QMAX)))


@dataclass(frozen=True)
class QuantTensor:
    data: np.ndarray  # uint8
    qp: QuantParams

    def __post_init__(self):
        if self.data.dtype != np.uint8:
            raise ValidationError(f"quantized data must be uint8, got {self.data.dtype}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


def quantize_tensor(x: np.ndarray, qp: QuantParams) -> QuantTensor:
    """q = clamp(round(x / scale) + zero_point, 0, 255); out-of-range values clamp."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValidationError("tensor contains non-finite values")
    q = round_half_away(x / qp.scale) + qp.zero_point
    return QuantTensor(data=np.clip(q, QMIN, QMAX).astype(np.uint8), qp=qp)


def dequantize(q: QuantTensor) -> np.ndarray:
    """x[i] = scale * (q[i] - zero_point), in float64 so grid values stay exact."""
    return (q.data.astype(np.int32) - q.qp.zero_point) * q.qp.scale


@dataclass(frozen=True)
class TensorRange:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"range min {self.lo} exceeds max {self.hi}")


@dataclass(frozen=True)
class CalibrationStats:
    """Exact observed min/max of each tensor the quantizer needs a range for."""

    features: TensorRange  # model input
    hidden: TensorRange  # post-dense1 pre-activation
    logits: TensorRange  # post-dense2 pre-activation


def calibrate(model: HeadModel, calib: list[np.ndarray]) -> CalibrationStats:
    """Track min/max of input features and both pre-activations, dropout off.

    `model` should already have BN folded so the tracked tensors match what
    the quantized head computes.
    """
    if len(calib) == 0:
        raise ValidationError("calibration set must be non-empty")
    ranges = np.full((3, 2), [np.inf, -np.inf])
    for features in calib:
        x = ftensor(features)
        if x.shape != (model.feature_dim,):
            raise ShapeError(f"calibration sample has shape {x.shape}, expected ({model.feature_dim},)")
        x = model.bn.forward(x).astype(np.float32)
        pre1 = x @ model.w1 + model.b1
        pre2 = np.maximum(pre1, np.float32(0.0)) @ model.w2 + model.b2
        for i, t in enumerate((x, pre1, pre2)):
            ranges[i, 0] = min(ranges[i, 0], float(t.min()))
            ranges[i, 1] = max(ranges[i, 1], float(t.max()))
    return CalibrationStats(
        features=TensorRange(*ranges[0]),
        hidden=TensorRange(*ranges[1]),
        logits=TensorRange(*ranges[2]),
    )


# Sigmoid scores live in (0, 1); a fixed 1/255 grid with zero_point 0 covers
# the codomain exactly and keeps 0.0 representable.
OUTPUT_QP = QuantParams(scale=1.0 / 255.0, zero_point=0)


@dataclass(frozen=True)
class QuantizedHead:
    """The head in uint8-affine form, plus the dropout ratios it inherited."""

    dropout1: float
    dropout2: float
    input_qp: QuantParams
    w1_qp: QuantParams
    hidden_qp: QuantParams  # post-dense1 pre-activation; ReLU output reuses it
    w2_qp: QuantParams
    logit_qp: QuantParams  # post-dense2 pre-activation
    output_qp: QuantParams
    w1: np.ndarray  # uint8, feature_dim x hidden_dim
    b1: np.ndarray  # int32, scale input_scale * w1_scale
    w2: np.ndarray  # uint8, hidden_dim x num_classes
    b2: np.ndarray  # int32, scale hidden_scale * w2_scale
    relu_lut: np.ndarray  # uint8[256]
    sigmoid_lut: np.ndarray  # uint8[256]

    def __post_init__(self):
        if self.w1.dtype != np.uint8 or self.w2.dtype != np.uint8:
            raise ValidationError("quantized weights must be uint8")
        if self.b1.dtype != np.int32 or self.b2.dtype != np.int32:
            raise ValidationError("quantized biases must be int32")
        for lut in (self.relu_lut, self.sigmoid_lut):
            if lut.shape != (256,) or lut.dtype != np.uint8:
                raise ValidationError("activation LUTs must be 256 uint8 entries")
        if np.any(np.diff(self.sigmoid_lut.astype(np.int32)) < 0):
            raise ValidationError("sigmoid LUT must be monotone non-decreasing")
        if self.w1.shape[1] != self.b1.shape[0] or self.w2.shape[1] != self.b2.shape[0]:
            raise ShapeError("bias widths must match weight columns")
        if self.w1.shape[1] != self.w2.shape[0]:
            raise ShapeError("dense1 output dim must match dense2 input dim")
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


def _quantize_bias(b: np.ndarray, scale: float) -> np.ndarray:
    q = round_half_away(b.astype(np.float64) / scale)
    return np.clip(q, INT32_MIN, INT32_MAX).astype(np.int32)


def _activation_lut(fn, in_qp: QuantParams, out_qp: QuantParams) -> np.ndarray:
    """Evaluate `fn` on all 256 dequantized input codes, requantize to out_qp."""
    codes = np.arange(256, dtype=np.int32)
    real = (codes - in_qp.zero_point) * in_qp.scale
    q = round_half_away(np.asarray(fn(real), dtype=np.float64) / out_qp.scale) + out_qp.zero_point
    return np.clip(q, QMIN, QMAX).astype(np.uint8)


def quantize_model(model: HeadModel, stats: CalibrationStats) -> QuantizedHead:
    """Quantize a BN-folded head using calibrated ranges."""
    if not model.bn.is_identity():
        raise ValidationError("fold batch norm into dense1 before quantizing")
    input_qp = params_from_range(stats.features.lo, stats.features.hi)
    hidden_qp = params_from_range(stats.hidden.lo, stats.hidden.hi)
    logit_qp = params_from_range(stats.logits.lo, stats.logits.hi)
    w1_qp = params_from_range(float(model.w1.min()), float(model.w1.max()))
    w2_qp = params_from_range(float(model.w2.min()), float(model.w2.max()))
    return QuantizedHead(
        dropout1=model.dropout1,
        dropout2=model.dropout2,
        input_qp=input_qp,
        w1_qp=w1_qp,
        hidden_qp=hidden_qp,
        w2_qp=w2_qp,
        logit_qp=logit_qp,
        output_qp=OUTPUT_QP,
        w1=quantize_tensor(model.w1, w1_qp).data,
        b1=_quantize_bias(model.b1, input_qp.scale * w1_qp.scale),
        w2=quantize_tensor(model.w2, w2_qp).data,
        b2=_quantize_bias(model.b2, hidden_qp.scale * w2_qp.scale),
        relu_lut=_activation_lut(lambda v: np.maximum(v, 0.0), hidden_qp, hidden_qp),
        sigmoid_lut=_activation_lut(sigmoid, logit_qp, OUTPUT_QP),
    )


def _integer_dense(qx: np.ndarray, x_qp: QuantParams, wq: np.ndarray, w_qp: QuantParams,
                   bias: np.ndarray, out_qp: QuantParams) -> np.ndarray:
    """uint8 x uint8 dense layer: int32 accumulate, then requantize to out_qp."""
    acc = (qx.astype(np.int32) - x_qp.zero_point) @ (wq.astype(np.int32) - w_qp.zero_point)
    acc = acc + bias
    multiplier = x_qp.scale * w_qp.scale / out_qp.scale
    q = round_half_away(acc.astype(np.float64) * multiplier) + out_qp.zero_point
    return np.clip(q, QMIN, QMAX).astype(np.uint8)


def _masked_requant(codes: np.ndarray, qp: QuantParams, mask) -> np.ndarray:
    # Dropout acts on real values: dequantize, mask + rescale, requantize.
    real = mask.apply(dequantize(QuantTensor(codes, qp)))
    return quantize_tensor(real, qp).data


def qhead_forward(qm: QuantizedHead, q_features: QuantTensor, masks: Masks | None = None) -> np.ndarray:
    """Integer-domain forward pass; returns real sigmoid scores in [0, 1]."""
    if q_features.qp != qm.input_qp:
        raise ValidationError("features were not quantized with this model's input params")
    if q_features.shape != (qm.feature_dim,):
        raise ShapeError(f"expected features of length {qm.feature_dim}, got {q_features.shape}")
    m1, m2 = masks if masks is not None else (None, None)
    qx = q_features.data
    if m1 is not None:
        qx = _masked_requant(qx, qm.input_qp, m1)
    qh = _integer_dense(qx, qm.input_qp, qm.w1, qm.w1_qp, qm.b1, qm.hidden_qp)
    qh = qm.relu_lut[qh]
    if m2 is not None:
        qh = _masked_requant(qh, qm.hidden_qp, m2)
    ql = _integer_dense(qh, qm.hidden_qp, qm.w2, qm.w2_qp, qm.b2, qm.logit_qp)
    qs = qm.sigmoid_lut[ql]
    return (qs.astype(np.float64) - qm.output_qp.zero_point) * qm.output_qp.scale


def quantize_head_pipeline(model: HeadModel, calib: list[np.ndarray]) -> QuantizedHead:
    """Fold BN, calibrate, quantize: the standard post-training path."""
    from .nets import fold_head

    folded = fold_head(model)
    return quantize_model(folded, calibrate(folded, calib))


def model_size_bytes(m: HeadModel | QuantizedHead) -> int:
    """Exact serialized size in bytes under the package's file formats."""
    from .formats import head_to_bytes, quantized_to_bytes

    if isinstance(m, HeadModel):
        return len(head_to_bytes(m))
    if isinstance(m, QuantizedHead):
        return len(quantized_to_bytes(m))
    raise ValidationError(f"unsupported model type {type(m).__name__}")
