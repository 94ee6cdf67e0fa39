"""Metrics and the end-to-end uncertainty evaluation pipeline.

Micro-F1 is computed from class-summed net TP/FP/FN counts,

    F1 = NetTP / (NetTP + (NetFP + NetFN) / 2)

over KEPT samples only; ignored samples are excluded from scoring and
counted separately. For the one-hot data this package targets, micro-F1
over argmax predictions reduces to plain accuracy.

The misclassified-ignored percentage asks how many of the ignored samples
the deterministic base model (no dropout, argmax) would have gotten wrong:

    misclassified_pct = 100 * MI / I

Metrics with no defined value (no kept samples, no ignored samples) are
reported as explicit None flags, never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decisions import IGNORE, KEEP, FilterOutcome, filter_prediction, ternary_assign
from .errors import ShapeError, UndefinedMetricError, ValidationError
from .quantize import QuantizedHead, qhead_forward, quantize_tensor
from .uncertainty import McConfig, column_skewness, interval_per_class, mc_sample, z_value


@dataclass(frozen=True)
class LabeledSample:
    id: int
    features: np.ndarray
    true_class: int
    corruption_tag: str | None = None
    severity: int | None = None


def one_hot(num_classes: int, true_class: int) -> np.ndarray:
    if not (0 <= true_class < num_classes):
        raise ValidationError(f"class {true_class} out of range [0, {num_classes})")
    v = np.zeros(num_classes, dtype=np.int8)
    v[true_class] = 1
    return v


def base_predict(model: QuantizedHead, sample: LabeledSample) -> int:
    """Dropout-free argmax of the quantized head; ties break to the lowest index."""
    scores = qhead_forward(model, quantize_tensor(sample.features, model.input_qp))
    return int(np.argmax(scores))


def confusion_counts(final_vectors, labels) -> tuple[int, int, int]:
    """Net (TP, FP, FN) summed over classes."""
    if len(final_vectors) != len(labels):
        raise ShapeError("predictions and labels must align")
    tp = fp = fn = 0
    for pred, label in zip(final_vectors, labels):
        pred = np.asarray(pred, dtype=np.int64)
        label = np.asarray(label, dtype=np.int64)
        if pred.shape != label.shape:
            raise ShapeError("prediction and label widths differ")
        tp += int(np.sum((pred == 1) & (label == 1)))
        fp += int(np.sum((pred == 1) & (label == 0)))
        fn += int(np.sum((pred == 0) & (label == 1)))
    return tp, fp, fn


def micro_f1(final_vectors, labels) -> float:
    if len(final_vectors) == 0:
        raise UndefinedMetricError("micro-F1 is undefined on an empty set")
    tp, fp, fn = confusion_counts(final_vectors, labels)
    denom = tp + 0.5 * (fp + fn)
    if denom == 0:
        raise UndefinedMetricError("micro-F1 is undefined when TP + FP + FN == 0")
    return tp / denom


@dataclass(frozen=True)
class SampleRun:
    """Everything the decision/metric stage needs about one sample."""

    sample: LabeledSample
    scores: np.ndarray  # num_iter x num_classes MC sample matrix
    base_prediction: int


@dataclass(frozen=True)
class SampleAudit:
    sample_id: int
    verdict: tuple[int, ...]
    outcome: str
    reason: str | None
    benefit_of_doubt: bool
    final: tuple[int, ...] | None
    base_prediction: int


@dataclass(frozen=True)
class EvalReport:
    num_samples: int
    config: McConfig
    net_tp: int
    net_fp: int
    net_fn: int
    micro_f1: float | None
    kept_ids: tuple[int, ...]
    ignored_ids: tuple[int, ...]
    misclassified_ignored: int
    misclassified_pct: float | None
    mean_abs_skew: float
    audits: tuple[SampleAudit, ...]

    def to_dict(self) -> dict:
        """Report as a JSON-ready dict with a stable field order."""
        return {
            "kind": "uq_eval",
            "config": {
                "num_iter": self.config.num_iter,
                "conf_factor": self.config.conf_factor,
                "threshold": self.config.threshold,
                "base_seed": self.config.base_seed,
            },
            "num_samples": self.num_samples,
            "net_tp": self.net_tp,
            "net_fp": self.net_fp,
            "net_fn": self.net_fn,
            "micro_f1_defined": self.micro_f1 is not None,
            "micro_f1": self.micro_f1,
            "kept_count": len(self.kept_ids),
            "ignored_count": len(self.ignored_ids),
            "kept_ids": list(self.kept_ids),
            "ignored_ids": list(self.ignored_ids),
            "misclassified_ignored": self.misclassified_ignored,
            "misclassified_pct_defined": self.misclassified_pct is not None,
            "misclassified_pct": self.misclassified_pct,
            "mean_abs_skew": self.mean_abs_skew,
            "samples": [
                {
                    "id": a.sample_id,
                    "verdict": list(a.verdict),
                    "outcome": a.outcome,
                    "reason": a.reason,
                    "benefit_of_doubt": a.benefit_of_doubt,
                    "final": list(a.final) if a.final is not None else None,
                    "base_prediction": a.base_prediction,
                }
                for a in self.audits
            ],
        }


def report_from_runs(runs: list[SampleRun], cfg: McConfig) -> EvalReport:
    """Decision rules + metrics over precomputed MC sample matrices."""
    if len(runs) == 0:
        raise ValidationError("cannot evaluate an empty dataset")
    z = z_value(cfg.conf_factor)
    kept_ids: list[int] = []
    ignored_ids: list[int] = []
    kept_finals: list[np.ndarray] = []
    kept_labels: list[np.ndarray] = []
    audits: list[SampleAudit] = []
    misclassified = 0
    skews: list[float] = []
    for run in runs:
        intervals = interval_per_class(run.scores, z)
        verdict = np.array([ternary_assign(iv, cfg.threshold) for iv in intervals], dtype=np.int8)
        outcome: FilterOutcome = filter_prediction(verdict)
        skews.append(float(np.mean(np.abs(column_skewness(run.scores)))))
        if outcome.kind == KEEP:
            kept_ids.append(run.sample.id)
            kept_finals.append(outcome.final)
            kept_labels.append(one_hot(len(verdict), run.sample.true_class))
        else:
            ignored_ids.append(run.sample.id)
            if run.base_prediction != run.sample.true_class:
                misclassified += 1
        audits.append(
            SampleAudit(
                sample_id=run.sample.id,
                verdict=tuple(int(t) for t in verdict),
                outcome=outcome.kind,
                reason=outcome.reason,
                benefit_of_doubt=outcome.benefit_of_doubt,
                final=tuple(int(b) for b in outcome.final) if outcome.final is not None else None,
                base_prediction=run.base_prediction,
            )
        )
    tp, fp, fn = confusion_counts(kept_finals, kept_labels)
    f1 = micro_f1(kept_finals, kept_labels) if kept_finals else None
    pct = 100.0 * misclassified / len(ignored_ids) if ignored_ids else None
    return EvalReport(
        num_samples=len(runs),
        config=cfg,
        net_tp=tp,
        net_fp=fp,
        net_fn=fn,
        micro_f1=f1,
        kept_ids=tuple(kept_ids),
        ignored_ids=tuple(ignored_ids),
        misclassified_ignored=misclassified,
        misclassified_pct=pct,
        mean_abs_skew=float(np.mean(skews)),
        audits=tuple(audits),
    )


def run_uq_eval(model: QuantizedHead, data: list[LabeledSample], cfg: McConfig) -> EvalReport:
    """MC-sample every sample, then apply the decision rules and metrics."""
    runs = []
    for sample in data:
        q_features = quantize_tensor(sample.features, model.input_qp)
        runs.append(
            SampleRun(
                sample=sample,
                scores=mc_sample(model, q_features, cfg),
                base_prediction=base_predict(model, sample),
            )
        )
    return report_from_runs(runs, cfg)


@dataclass(frozen=True)
class GridResult:
    """(micro-F1, ignored count) per (conf_factor, num_iter) cell."""

    conf_factors: tuple[float, ...]
    num_iters: tuple[int, ...]
    f1: tuple[tuple[float | None, ...], ...]  # rows conf_factor, cols num_iter
    ignored: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "kind": "uq_grid",
            "conf_factors": list(self.conf_factors),
            "num_iters": list(self.num_iters),
            "micro_f1": [list(row) for row in self.f1],
            "ignored": [list(row) for row in self.ignored],
        }


def grid_search(
    model: QuantizedHead,
    data: list[LabeledSample],
    conf_factors: list[float],
    num_iters: list[int],
    threshold: float = 0.5,
    base_seed: int = 0,
) -> GridResult:
    """One run_uq_eval per (conf_factor, num_iter) pair under a shared seed."""
    if not conf_factors or not num_iters:
        raise ValidationError("grid axes must be non-empty")
    f1_rows = []
    ignored_rows = []
    for c in conf_factors:
        f1_row = []
        ignored_row = []
        for n in num_iters:
            cfg = McConfig(num_iter=n, conf_factor=c, threshold=threshold, base_seed=base_seed)
            report = run_uq_eval(model, data, cfg)
            f1_row.append(report.micro_f1)
            ignored_row.append(len(report.ignored_ids))
        f1_rows.append(tuple(f1_row))
        ignored_rows.append(tuple(ignored_row))
    return GridResult(
        conf_factors=tuple(conf_factors),
        num_iters=tuple(num_iters),
        f1=tuple(f1_rows),
        ignored=tuple(ignored_rows),
    )
