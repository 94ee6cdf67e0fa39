"""Monte-Carlo dropout sampling and per-class confidence intervals.

Repeated stochastic forward passes give a matrix of sigmoid scores per
input; treating each class column as Gaussian, the interval

    (mean - z * std, mean + z * std)

captures where the true score is believed to lie. `z` comes from the
two-sided normal quantile of the configured confidence factor, and the
standard deviation is Bessel-corrected, which is why at least two
iterations are required.

Iteration k draws its dropout masks from a generator seeded by
(base_seed, k), so the sample matrix is reproducible and independent of
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import ValidationError
from .nets import draw_mask
from .quantize import QuantizedHead, QuantTensor, qhead_forward
from .rng import iteration_rng


@dataclass(frozen=True)
class McConfig:
    """Sampling and decision settings for one uncertainty run."""

    num_iter: int
    conf_factor: float
    threshold: float = 0.5
    base_seed: int = 0

    def __post_init__(self):
        if self.num_iter < 2:
            raise ValidationError(f"num_iter must be >= 2, got {self.num_iter}")
        if not (0.0 < self.conf_factor < 1.0):
            raise ValidationError(f"conf_factor must be in (0, 1), got {self.conf_factor}")
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError(f"threshold must be in (0, 1), got {self.threshold}")


def z_value(conf_factor: float) -> float:
    """Two-sided standard-normal quantile: Phi^-1((1 + conf_factor) / 2)."""
    if not (0.0 < conf_factor < 1.0):
        raise ValidationError(f"conf_factor must be in (0, 1), got {conf_factor}")
    return NormalDist().inv_cdf((1.0 + conf_factor) / 2.0)


def validate_samples(samples: np.ndarray) -> np.ndarray:
    """Check a prediction-sample matrix: num_iter x num_classes scores in [0, 1]."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValidationError("prediction samples must be a 2-D matrix")
    if np.any(samples < 0.0) or np.any(samples > 1.0) or not np.all(np.isfinite(samples)):
        raise ValidationError("prediction samples must be scores in [0, 1]")
    return samples


def mc_sample(model: QuantizedHead, features: QuantTensor, cfg: McConfig) -> np.ndarray:
    """num_iter stochastic forward passes; row k uses masks seeded by (base_seed, k)."""
    rows = np.empty((cfg.num_iter, model.num_classes), dtype=np.float64)
    for k in range(cfg.num_iter):
        rng = iteration_rng(cfg.base_seed, k)
        masks = (
            draw_mask(model.feature_dim, model.dropout1, rng),
            draw_mask(model.hidden_dim, model.dropout2, rng),
        )
        rows[k] = qhead_forward(model, features, masks)
    return rows


@dataclass(frozen=True)
class ClassInterval:
    mean: float
    std: float
    z: float

    def __post_init__(self):
        if self.std < 0 or self.z < 0:
            raise ValidationError("std and z must be non-negative")

    @property
    def lo(self) -> float:
        return self.mean - self.z * self.std

    @property
    def hi(self) -> float:
        return self.mean + self.z * self.std


def interval_per_class(samples: np.ndarray, z: float) -> list[ClassInterval]:
    """Bessel-corrected mean/std interval per class column.

    Intervals are deliberately not clipped to [0, 1]: clipping would move
    an endpoint onto or across the threshold and silently change verdicts
    near saturated scores.
    """
    samples = validate_samples(samples)
    if samples.shape[0] < 2:
        raise ValidationError("need at least 2 sample rows to estimate a std")
    if z < 0:
        raise ValidationError(f"z must be non-negative, got {z}")
    means = samples.mean(axis=0)
    # Shift by the first row before the two-pass std: mathematically a no-op,
    # but it makes constant columns come out as exactly 0 instead of carrying
    # the mean's representation error into the variance.
    stds = (samples - samples[0]).std(axis=0, ddof=1)
    return [ClassInterval(mean=float(m), std=float(s), z=z) for m, s in zip(means, stds)]


def column_skewness(samples: np.ndarray) -> np.ndarray:
    """Empirical skew of each class column; a diagnostic for the Gaussian assumption."""
    samples = validate_samples(samples)
    centered = samples - samples.mean(axis=0)
    std = samples.std(axis=0)
    m3 = (centered**3).mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        skew = np.where(std > 0, m3 / std**3, 0.0)
    return skew
