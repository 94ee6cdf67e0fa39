"""Inference-time comparison: one deterministic pass vs the full UQ pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .decisions import filter_prediction, ternary_assign
from .errors import ValidationError
from .quantize import QuantizedHead, qhead_forward, quantize_tensor
from .uncertainty import interval_per_class, z_value
from .nets import draw_mask
from .rng import iteration_rng


@dataclass(frozen=True)
class BenchReport:
    num_iter: int
    repeats: int
    single_pass_ms: float  # median over repeats
    uq_ms: float  # median over repeats
    ratio: float  # uq / single

    def to_dict(self) -> dict:
        return {
            "kind": "bench",
            "num_iter": self.num_iter,
            "repeats": self.repeats,
            "single_pass_ms": self.single_pass_ms,
            "uq_ms": self.uq_ms,
            "ratio": self.ratio,
        }


def bench(
    model: QuantizedHead,
    features: np.ndarray,
    num_iter: int,
    repeats: int = 10,
    conf_factor: float = 0.7,
    threshold: float = 0.5,
    base_seed: int = 0,
) -> BenchReport:
    """Median wall-clock latency of one pass and of the full UQ pipeline.

    Unlike McConfig, num_iter == 1 is allowed here: timing a single
    stochastic pass is still meaningful, so the sample row is duplicated
    to keep the interval/decision stage runnable (std collapses to 0).
    """
    if repeats < 10:
        raise ValidationError(f"need at least 10 repetitions, got {repeats}")
    if num_iter < 1:
        raise ValidationError(f"num_iter must be >= 1, got {num_iter}")
    q_features = quantize_tensor(np.asarray(features, dtype=np.float32), model.input_qp)
    z = z_value(conf_factor)

    def one_pass():
        qhead_forward(model, q_features)

    def full_uq():
        rows = np.empty((num_iter, model.num_classes), dtype=np.float64)
        for k in range(num_iter):
            rng = iteration_rng(base_seed, k)
            masks = (
                draw_mask(model.feature_dim, model.dropout1, rng),
                draw_mask(model.hidden_dim, model.dropout2, rng),
            )
            rows[k] = qhead_forward(model, q_features, masks)
        if num_iter == 1:
            rows = np.repeat(rows, 2, axis=0)
        intervals = interval_per_class(rows, z)
        filter_prediction(np.array([ternary_assign(iv, threshold) for iv in intervals]))

    one_pass()  # warm up caches and lazy allocations before timing
    full_uq()
    single_times = []
    uq_times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        one_pass()
        single_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        full_uq()
        uq_times.append(time.perf_counter() - t0)
    single_ms = float(np.median(single_times) * 1000.0)
    uq_ms = float(np.median(uq_times) * 1000.0)
    return BenchReport(
        num_iter=num_iter,
        repeats=repeats,
        single_pass_ms=single_ms,
        uq_ms=uq_ms,
        ratio=uq_ms / single_ms,
    )
