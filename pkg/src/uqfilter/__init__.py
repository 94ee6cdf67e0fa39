"""Uncertainty-filtered inference for uint8-quantized classifier heads.

Pipeline: fold batch norm into the first dense layer, calibrate and
quantize the head to uint8, run Monte-Carlo dropout over the quantized
forward pass, build per-class confidence intervals, and keep or ignore
each prediction by comparing the intervals against a score threshold.
"""

from .bench import BenchReport, bench
from .decisions import (
    IGNORE,
    KEEP,
    REASON_ALL_ABSENT,
    REASON_UNCERTAIN_ONLY,
    FilterOutcome,
    filter_prediction,
    ternary_assign,
)
from .errors import (
    BadMagicError,
    DimensionMismatchError,
    FormatError,
    ShapeError,
    TruncatedPayloadError,
    UndefinedMetricError,
    ValidationError,
    VersionMismatchError,
)
from .evaluate import (
    EvalReport,
    GridResult,
    LabeledSample,
    SampleAudit,
    SampleRun,
    base_predict,
    confusion_counts,
    grid_search,
    micro_f1,
    one_hot,
    report_from_runs,
    run_uq_eval,
)
from .fixtures import (
    PlantedProblem,
    make_fixtures,
    planted_dataset,
    planted_head,
    random_features,
    random_head,
)
from .formats import (
    Dataset,
    dataset_from_bytes,
    dataset_to_bytes,
    head_from_bytes,
    head_to_bytes,
    load_dataset,
    load_head,
    load_quantized,
    quantized_from_bytes,
    quantized_to_bytes,
    save_dataset,
    save_head,
    save_quantized,
)
from .nets import (
    BatchNorm,
    DropoutMask,
    HeadModel,
    apply_dropout,
    batchnorm_fold,
    dense_forward,
    draw_mask,
    fold_head,
    ftensor,
    head_forward,
    sigmoid,
)
from .quantize import (
    OUTPUT_QP,
    CalibrationStats,
    QuantParams,
    QuantTensor,
    QuantizedHead,
    calibrate,
    dequantize,
    model_size_bytes,
    params_from_range,
    qhead_forward,
    quantize_head_pipeline,
    quantize_model,
    quantize_tensor,
)
from .rng import iteration_rng, resolve_seed
from .uncertainty import (
    ClassInterval,
    McConfig,
    column_skewness,
    interval_per_class,
    mc_sample,
    z_value,
)

__all__ = [
    "BadMagicError",
    "BatchNorm",
    "BenchReport",
    "CalibrationStats",
    "ClassInterval",
    "Dataset",
    "DimensionMismatchError",
    "DropoutMask",
    "EvalReport",
    "FilterOutcome",
    "FormatError",
    "GridResult",
    "HeadModel",
    "IGNORE",
    "KEEP",
    "LabeledSample",
    "McConfig",
    "OUTPUT_QP",
    "PlantedProblem",
    "QuantParams",
    "QuantTensor",
    "QuantizedHead",
    "REASON_ALL_ABSENT",
    "REASON_UNCERTAIN_ONLY",
    "SampleAudit",
    "SampleRun",
    "ShapeError",
    "TruncatedPayloadError",
    "UndefinedMetricError",
    "ValidationError",
    "VersionMismatchError",
    "apply_dropout",
    "base_predict",
    "batchnorm_fold",
    "bench",
    "calibrate",
    "column_skewness",
    "confusion_counts",
    "dataset_from_bytes",
    "dataset_to_bytes",
    "dense_forward",
    "dequantize",
    "draw_mask",
    "filter_prediction",
    "fold_head",
    "ftensor",
    "grid_search",
    "head_forward",
    "head_from_bytes",
    "head_to_bytes",
    "interval_per_class",
    "iteration_rng",
    "load_dataset",
    "load_head",
    "load_quantized",
    "make_fixtures",
    "mc_sample",
    "micro_f1",
    "model_size_bytes",
    "one_hot",
    "params_from_range",
    "planted_dataset",
    "planted_head",
    "qhead_forward",
    "quantize_head_pipeline",
    "quantize_model",
    "quantize_tensor",
    "quantized_from_bytes",
    "quantized_to_bytes",
    "random_features",
    "random_head",
    "report_from_runs",
    "resolve_seed",
    "run_uq_eval",
    "save_dataset",
    "save_head",
    "save_quantized",
    "sigmoid",
    "ternary_assign",
    "z_value",
]
