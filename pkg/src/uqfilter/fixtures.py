"""Synthetic fixture generation: random heads and planted-classifier datasets.

The planted construction wires dense2 to hidden-space class prototypes and
centers the biases between each class's own logit and its strongest
impostor, so the untrained head still classifies clean samples confidently
while noisy ones land near the decision threshold. That gives fixture
evaluations the same texture as real runs: most samples kept, a noisy
minority ignored.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .formats import Dataset, save_dataset, save_head
from .nets import BatchNorm, HeadModel, head_forward


def random_head(
    rng: np.random.Generator,
    feature_dim: int = 32,
    hidden_dim: int = 16,
    num_classes: int = 8,
    dropout1: float = 0.2,
    dropout2: float = 0.4,
    identity_bn: bool = False,
) -> HeadModel:
    """A head with random weights and plausible (non-identity) BN statistics."""
    if identity_bn:
        bn = BatchNorm.identity(feature_dim)
    else:
        bn = BatchNorm(
            gamma=rng.uniform(0.9, 1.1, feature_dim).astype(np.float32),
            beta=rng.normal(0.0, 0.05, feature_dim).astype(np.float32),
            mean=rng.normal(0.0, 0.2, feature_dim).astype(np.float32),
            var=rng.uniform(0.5, 1.5, feature_dim).astype(np.float32),
            epsilon=1e-3,
        )
    return HeadModel(
        bn=bn,
        dropout1=dropout1,
        w1=(rng.normal(0.0, 1.0, (feature_dim, hidden_dim)) / np.sqrt(feature_dim)).astype(np.float32),
        b1=rng.normal(0.0, 0.05, hidden_dim).astype(np.float32),
        dropout2=dropout2,
        w2=(rng.normal(0.0, 1.0, (hidden_dim, num_classes)) / np.sqrt(hidden_dim)).astype(np.float32),
        b2=rng.normal(0.0, 0.05, num_classes).astype(np.float32),
    )


def random_features(rng: np.random.Generator, n: int, feature_dim: int) -> np.ndarray:
    return rng.normal(0.0, 1.0, (n, feature_dim)).astype(np.float32)


@dataclass(frozen=True)
class PlantedProblem:
    """A head and the class prototypes its dense2 layer was built around."""

    head: HeadModel
    prototypes: np.ndarray  # num_classes x feature_dim


def planted_head(
    rng: np.random.Generator,
    feature_dim: int = 64,
    hidden_dim: int = 32,
    num_classes: int = 10,
    dropout1: float = 0.2,
    dropout2: float = 0.4,
    margin: float = 2.5,
) -> PlantedProblem:
    """Build a head whose argmax recovers the planted class prototypes.

    Each class column of dense2 points at that class's hidden-space
    prototype; biases sit halfway between the class's own logit and its
    strongest impostor, then everything is rescaled so that gap is
    `margin` logits wide.
    """
    base = random_head(rng, feature_dim, hidden_dim, num_classes, dropout1, dropout2)
    prototypes = rng.normal(0.0, 1.0, (num_classes, feature_dim)).astype(np.float32)
    hidden = np.maximum(base.bn.forward(prototypes) @ base.w1 + base.b1, 0.0)
    directions = hidden - hidden.mean(axis=0)
    norms = np.linalg.norm(directions, axis=1)
    if np.any(norms < 1e-6):
        raise ValidationError("degenerate prototypes; use a different seed")
    w2 = (directions / norms[:, None]).T.astype(np.float32)
    raw = hidden @ w2  # raw[k, c]: class-c logit of prototype k, bias-free
    own = np.diag(raw).copy()
    impostor = np.where(np.eye(num_classes, dtype=bool), -np.inf, raw).max(axis=0)
    half_gap = (own - impostor) / 2.0
    if np.any(half_gap <= 1e-3):
        raise ValidationError("prototypes not separable; use a different seed")
    gain = margin / half_gap
    w2 = (w2 * gain[None, :]).astype(np.float32)
    b2 = (-(own + impostor) / 2.0 * gain).astype(np.float32)
    head = HeadModel(
        bn=base.bn,
        dropout1=dropout1,
        w1=base.w1,
        b1=base.b1,
        dropout2=dropout2,
        w2=w2,
        b2=b2,
    )
    return PlantedProblem(head=head, prototypes=prototypes)


def planted_dataset(
    rng: np.random.Generator,
    problem: PlantedProblem,
    num_samples: int,
    noise: float = 0.35,
    corruption_tag: str | None = None,
    severity: int | None = None,
) -> Dataset:
    """Samples around the planted prototypes, optionally corrupted.

    A corruption adds a deterministic per-tag feature shift plus extra
    noise, both growing with severity, mimicking a distribution shift the
    head was never exposed to.
    """
    if num_samples < 1:
        raise ValidationError("num_samples must be >= 1")
    num_classes, feature_dim = problem.prototypes.shape
    labels = rng.integers(0, num_classes, num_samples).astype(np.uint16)
    features = problem.prototypes[labels] + rng.normal(0.0, noise, (num_samples, feature_dim))
    if corruption_tag is not None:
        sev = 1 if severity is None else severity
        tag_rng = np.random.default_rng(zlib.crc32(corruption_tag.encode("utf-8")))
        shift = tag_rng.normal(0.0, 0.25 * sev, feature_dim)
        features = features + shift + rng.normal(0.0, 0.15 * sev, features.shape)
    return Dataset(
        features=features.astype(np.float32),
        labels=labels,
        num_classes=num_classes,
        corruption_tag=corruption_tag,
        severity=severity,
    )


def make_fixtures(
    out_dir: str | Path,
    seed: int = 0,
    feature_dim: int = 64,
    hidden_dim: int = 32,
    num_classes: int = 10,
    calib_samples: int = 128,
    test_samples: int = 100,
    noise: float = 0.35,
    corruptions: list[str] | None = None,
    severities: list[int] | None = None,
) -> dict[str, Path]:
    """Write a head plus calibration/test datasets; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    problem = planted_head(rng, feature_dim, hidden_dim, num_classes)
    paths: dict[str, Path] = {}

    paths["head"] = out / "head.uqhm"
    save_head(problem.head, paths["head"])
    paths["calib"] = out / "calib.uqds"
    save_dataset(planted_dataset(rng, problem, calib_samples, noise), paths["calib"])
    paths["test"] = out / "test.uqds"
    save_dataset(planted_dataset(rng, problem, test_samples, noise), paths["test"])

    for tag in corruptions or []:
        for sev in severities or [1]:
            name = f"test_{tag}_s{sev}"
            paths[name] = out / f"{name}.uqds"
            save_dataset(
                planted_dataset(rng, problem, test_samples, noise,
                                corruption_tag=tag, severity=sev),
                paths[name],
            )
    return paths


def sanity_accuracy(problem: PlantedProblem, ds: Dataset) -> float:
    """Float-head argmax accuracy; used to sanity-check fixture quality."""
    correct = 0
    for s in ds.samples():
        scores = head_forward(problem.head, s.features)
        correct += int(np.argmax(scores)) == s.true_class
    return correct / ds.num_samples
