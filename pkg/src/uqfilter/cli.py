"""Command-line surface: quantize, infer, uq run/grid, report, bench, fixtures.

Exit codes: 0 success, 1 validation/parse failure, 2 usage error
(unknown flags, missing files).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .bench import bench as run_bench
from .errors import FormatError, UndefinedMetricError, ValidationError
from .evaluate import base_predict, grid_search, micro_f1, one_hot, run_uq_eval
from .fixtures import make_fixtures
from .formats import load_dataset, load_head, load_quantized, save_quantized
from .quantize import QuantizedHead, model_size_bytes, quantize_head_pipeline
from .rng import resolve_seed
from .uncertainty import McConfig


def _write_json(doc: dict, path: str) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _load_model_and_data(args) -> tuple[QuantizedHead, object]:
    model = load_quantized(args.model)
    data = load_dataset(args.data)
    if data.feature_dim != model.feature_dim:
        raise ValidationError(
            f"dataset feature_dim {data.feature_dim} != model feature_dim {model.feature_dim}"
        )
    if data.num_classes != model.num_classes:
        raise ValidationError(
            f"dataset num_classes {data.num_classes} != model num_classes {model.num_classes}"
        )
    return model, data


def _apply_dropout_overrides(model: QuantizedHead, args) -> QuantizedHead:
    overrides = {}
    if getattr(args, "dropout1", None) is not None:
        overrides["dropout1"] = args.dropout1
    if getattr(args, "dropout2", None) is not None:
        overrides["dropout2"] = args.dropout2
    return dataclasses.replace(model, **overrides) if overrides else model


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_quantize(args) -> int:
    model = load_head(args.model)
    calib = load_dataset(args.calib)
    if calib.feature_dim != model.feature_dim:
        raise ValidationError(
            f"calibration feature_dim {calib.feature_dim} != model feature_dim {model.feature_dim}"
        )
    quantized = quantize_head_pipeline(model, list(calib.features))
    save_quantized(quantized, args.out)
    float_size = model_size_bytes(model)
    quant_size = model_size_bytes(quantized)
    print(f"wrote {args.out}: {quant_size} bytes "
          f"({float_size} float, ratio {quant_size / float_size:.3f})")
    return 0


def cmd_infer(args) -> int:
    model, data = _load_model_and_data(args)
    model = _apply_dropout_overrides(model, args)
    predictions = [base_predict(model, s) for s in data.samples()]
    finals = [one_hot(model.num_classes, p) for p in predictions]
    labels = [one_hot(model.num_classes, int(t)) for t in data.labels]
    correct = sum(int(p == int(t)) for p, t in zip(predictions, data.labels))
    doc = {
        "kind": "base_infer",
        "num_samples": data.num_samples,
        "correct": correct,
        "micro_f1": micro_f1(finals, labels),
        "predictions": predictions,
    }
    _write_json(doc, args.out)
    print(f"wrote {args.out}: micro_f1={doc['micro_f1']:.4f} ({correct}/{data.num_samples})")
    return 0


def cmd_uq_run(args) -> int:
    model, data = _load_model_and_data(args)
    model = _apply_dropout_overrides(model, args)
    cfg = McConfig(
        num_iter=args.num_iter,
        conf_factor=args.conf_factor,
        threshold=args.threshold,
        base_seed=resolve_seed(args.seed),
    )
    report = run_uq_eval(model, data.samples(), cfg)
    _write_json(report.to_dict(), args.out)
    f1 = "undefined" if report.micro_f1 is None else f"{report.micro_f1:.4f}"
    pct = "undefined" if report.misclassified_pct is None else f"{report.misclassified_pct:.2f}%"
    print(f"wrote {args.out}: kept={len(report.kept_ids)} ignored={len(report.ignored_ids)} "
          f"micro_f1={f1} misclassified_pct={pct}")
    return 0


def _format_grid(grid_doc: dict) -> str:
    confs = grid_doc["conf_factors"]
    iters = grid_doc["num_iters"]
    lines = []
    header = "conf_factor" + "".join(f"  num_iter={n:>4}" for n in iters)
    for title, matrix, fmt in (
        ("micro-F1", grid_doc["micro_f1"], lambda v: "   undef" if v is None else f"{v:8.4f}"),
        ("ignored", grid_doc["ignored"], lambda v: f"{v:8d}"),
    ):
        lines.append(f"[{title}]")
        lines.append(header)
        for c, row in zip(confs, matrix):
            lines.append(f"{c:>11.3f}" + "".join(f"  {fmt(v):>13}" for v in row))
    return "\n".join(lines)


def cmd_uq_grid(args) -> int:
    model, data = _load_model_and_data(args)
    model = _apply_dropout_overrides(model, args)
    grid = grid_search(
        model,
        data.samples(),
        conf_factors=_csv_floats(args.conf_factors),
        num_iters=_csv_ints(args.num_iters),
        threshold=args.threshold,
        base_seed=resolve_seed(args.seed),
    )
    doc = grid.to_dict()
    print(_format_grid(doc))
    if args.out:
        _write_json(doc, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_report(args) -> int:
    doc = json.loads(Path(args.path).read_text(encoding="utf-8"))
    kind = doc.get("kind", "unknown")
    if kind == "uq_eval":
        cfg = doc["config"]
        print(f"uncertainty evaluation: {doc['num_samples']} samples, "
              f"conf_factor={cfg['conf_factor']} num_iter={cfg['num_iter']} "
              f"threshold={cfg['threshold']} seed={cfg['base_seed']}")
        f1 = f"{doc['micro_f1']:.4f}" if doc["micro_f1_defined"] else "undefined"
        pct = f"{doc['misclassified_pct']:.2f}%" if doc["misclassified_pct_defined"] else "undefined"
        print(f"  kept {doc['kept_count']} / ignored {doc['ignored_count']}")
        print(f"  net TP/FP/FN: {doc['net_tp']}/{doc['net_fp']}/{doc['net_fn']}")
        print(f"  micro-F1 (kept): {f1}")
        print(f"  misclassified ignored: {doc['misclassified_ignored']} ({pct})")
        bod = [s["id"] for s in doc["samples"] if s["benefit_of_doubt"]]
        if bod:
            print(f"  benefit of the doubt applied to: {bod}")
    elif kind == "uq_grid":
        print(_format_grid(doc))
    elif kind == "bench":
        print(f"bench: num_iter={doc['num_iter']} repeats={doc['repeats']}")
        print(f"  single pass: {doc['single_pass_ms']:.3f} ms")
        print(f"  full UQ:     {doc['uq_ms']:.3f} ms")
        print(f"  ratio:       {doc['ratio']:.1f}x")
    elif kind == "base_infer":
        print(f"base inference: {doc['num_samples']} samples, "
              f"micro_f1={doc['micro_f1']:.4f} ({doc['correct']} correct)")
    else:
        raise ValidationError(f"unrecognized report kind {kind!r}")
    return 0


def cmd_bench(args) -> int:
    model, data = _load_model_and_data(args)
    if data.num_samples < 1:
        raise ValidationError("bench needs at least one sample")
    report = run_bench(model, data.features[0], num_iter=args.num_iter,
                       repeats=args.repeats)
    print(f"single pass: {report.single_pass_ms:.3f} ms  "
          f"full UQ ({report.num_iter} iters): {report.uq_ms:.3f} ms  "
          f"ratio: {report.ratio:.1f}x")
    if args.out:
        _write_json(report.to_dict(), args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_fixtures_make(args) -> int:
    paths = make_fixtures(
        out_dir=args.out_dir,
        seed=resolve_seed(args.seed),
        feature_dim=args.feature_dim,
        hidden_dim=args.hidden_dim,
        num_classes=args.num_classes,
        calib_samples=args.calib_samples,
        test_samples=args.test_samples,
        noise=args.noise,
        corruptions=_csv_strs(args.corruptions),
        severities=_csv_ints(args.severities) if args.severities else [1],
    )
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _csv_strs(text: str | None) -> list[str]:
    if not text:
        return []
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None,
                   help="base RNG seed (falls back to UQF_SEED, then 0)")


def _add_dropout_overrides(p):
    p.add_argument("--dropout1", type=float, default=None, help="override first dropout ratio")
    p.add_argument("--dropout2", type=float, default=None, help="override second dropout ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqf",
        description="Quantized-head inference with MC-dropout uncertainty filtering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantize", help="post-training quantization of a float head")
    p.add_argument("--model", required=True, help="input .uqhm float head")
    p.add_argument("--calib", required=True, help=".uqds calibration dataset")
    p.add_argument("--out", required=True, help="output .uqqm quantized head")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("infer", help="deterministic base-model inference")
    p.add_argument("--model", required=True, help=".uqqm quantized head")
    p.add_argument("--data", required=True, help=".uqds dataset")
    p.add_argument("--out", required=True, help="output report JSON")
    _add_dropout_overrides(p)
    p.set_defaults(func=cmd_infer)

    uq = sub.add_parser("uq", help="uncertainty-filtered inference")
    uq_sub = uq.add_subparsers(dest="uq_command", required=True)

    p = uq_sub.add_parser("run", help="one evaluation with keep/ignore filtering")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--conf-factor", type=float, default=0.7)
    p.add_argument("--num-iter", type=int, default=50)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True, help="output report JSON")
    _add_seed(p)
    _add_dropout_overrides(p)
    p.set_defaults(func=cmd_uq_run)

    p = uq_sub.add_parser("grid", help="grid search over conf_factor x num_iter")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--conf-factors", required=True, help="comma-separated, e.g. 0.7,0.8,0.9")
    p.add_argument("--num-iters", required=True, help="comma-separated, e.g. 20,30,50")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", default=None, help="optional output JSON")
    _add_seed(p)
    _add_dropout_overrides(p)
    p.set_defaults(func=cmd_uq_grid)

    p = sub.add_parser("report", help="pretty-print a saved report")
    p.add_argument("path", help="report JSON file")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bench", help="single-pass vs full-UQ latency")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--num-iter", type=int, default=50)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--out", default=None, help="optional output JSON")
    p.set_defaults(func=cmd_bench)

    fixtures = sub.add_parser("fixtures", help="synthetic fixture generation")
    fx_sub = fixtures.add_subparsers(dest="fixtures_command", required=True)
    p = fx_sub.add_parser("make", help="emit a synthetic head + datasets")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--feature-dim", type=int, default=64)
    p.add_argument("--hidden-dim", type=int, default=32)
    p.add_argument("--num-classes", type=int, default=10)
    p.add_argument("--calib-samples", type=int, default=128)
    p.add_argument("--test-samples", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.35)
    p.add_argument("--corruptions", default=None, help="comma-separated tags")
    p.add_argument("--severities", default=None, help="comma-separated levels")
    _add_seed(p)
    p.set_defaults(func=cmd_fixtures_make)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename or e}", file=sys.stderr)
        return 2
    except (ValidationError, FormatError, UndefinedMetricError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
