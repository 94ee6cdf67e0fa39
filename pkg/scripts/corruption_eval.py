"""Measure how the uncertainty filter reacts to increasingly corrupted data.

Evaluates the same quantized head on a clean test set and on corrupted
variants at growing severity. As the inputs drift away from the training
distribution the filter should ignore more samples, and the ignored pool
should contain most of what the base model would have misclassified.
"""

import argparse

import numpy as np

from uqfilter import (
    McConfig,
    planted_dataset,
    planted_head,
    quantize_head_pipeline,
    run_uq_eval,
)
from uqfilter.rng import resolve_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--noise", type=float, default=0.35)
    ap.add_argument("--severities", default="1,2,3,4")
    ap.add_argument("--conf-factor", type=float, default=0.7)
    ap.add_argument("--num-iter", type=int, default=50)
    args = ap.parse_args()

    seed = resolve_seed(args.seed)
    rng = np.random.default_rng(seed)
    problem = planted_head(rng, feature_dim=64, hidden_dim=32, num_classes=10)
    calib = planted_dataset(rng, problem, 128, noise=args.noise)
    quantized = quantize_head_pipeline(problem.head, list(calib.features))
    cfg = McConfig(num_iter=args.num_iter, conf_factor=args.conf_factor, base_seed=seed)

    print(f"seed={seed} conf_factor={cfg.conf_factor} num_iter={cfg.num_iter}")
    print(f"{'dataset':>12}  {'kept':>5}  {'ignored':>7}  {'F1(kept)':>9}  {'miscl%':>7}")
    datasets = [("clean", planted_dataset(rng, problem, args.samples, noise=args.noise))]
    for sev in (int(s) for s in args.severities.split(",")):
        ds = planted_dataset(rng, problem, args.samples, noise=args.noise,
                             corruption_tag="drift", severity=sev)
        datasets.append((f"drift s{sev}", ds))

    for name, ds in datasets:
        report = run_uq_eval(quantized, ds.samples(), cfg)
        f1 = "undef" if report.micro_f1 is None else f"{report.micro_f1:.4f}"
        pct = "undef" if report.misclassified_pct is None else f"{report.misclassified_pct:.1f}"
        print(f"{name:>12}  {len(report.kept_ids):>5}  {len(report.ignored_ids):>7}  "
              f"{f1:>9}  {pct:>7}")


if __name__ == "__main__":
    main()
