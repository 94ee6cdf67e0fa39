"""Sweep conf_factor x num_iter on a synthetic head and print the grid.

Builds a planted-classifier fixture, quantizes it, then reports kept-set
micro-F1 and the ignored count for every grid cell. Higher confidence
factors widen the intervals, so more samples land in the uncertain band
and get ignored; more iterations tighten the std estimate.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from uqfilter import grid_search, planted_dataset, planted_head, quantize_head_pipeline
from uqfilter.cli import _format_grid
from uqfilter.rng import resolve_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--noise", type=float, default=0.45)
    ap.add_argument("--conf-factors", default="0.7,0.8,0.9")
    ap.add_argument("--num-iters", default="20,30,50")
    ap.add_argument("--out", type=Path, default=None, help="optional JSON output path")
    args = ap.parse_args()

    seed = resolve_seed(args.seed)
    rng = np.random.default_rng(seed)
    problem = planted_head(rng, feature_dim=64, hidden_dim=32, num_classes=10)
    calib = planted_dataset(rng, problem, 128, noise=args.noise)
    quantized = quantize_head_pipeline(problem.head, list(calib.features))
    data = planted_dataset(rng, problem, args.samples, noise=args.noise).samples()

    grid = grid_search(
        quantized,
        data,
        conf_factors=[float(x) for x in args.conf_factors.split(",")],
        num_iters=[int(x) for x in args.num_iters.split(",")],
        base_seed=seed,
    )
    doc = grid.to_dict()
    print(f"seed={seed} samples={args.samples} noise={args.noise}")
    print(_format_grid(doc))
    if args.out:
        args.out.write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
