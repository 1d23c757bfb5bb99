#!/usr/bin/env python3
"""Best-of-N vs pessimistic best-of-N suboptimality as training data
grows; prints per-n means and the fitted log-log slopes."""

import argparse
import csv
import json
import math
from pathlib import Path

import numpy as np

from hetpref import FitConfig
from hetpref.simulate import bon_suboptimality_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-grid", default="200,400,800,1600,3200,6400")
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--prompts", type=int, default=64)
    ap.add_argument("--gap-lo", type=float, default=0.01)
    ap.add_argument("--gap-hi", type=float, default=2.0)
    ap.add_argument("--narrow-better-frac", type=float, default=0.75)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--iters", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=20250811)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    n_grid = [int(v) for v in args.n_grid.split(",")]
    fit = FitConfig(
        max_iters=args.iters, init_theta=[0.0] * 3, init_gamma=[0.0] * 2,
        box_theta=1.0, box_gamma=1.0,
    )
    points = bon_suboptimality_sweep(
        n_grid, trials=args.trials, fit=fit, alpha=args.alpha, seed=args.seed,
        n_prompts=args.prompts, gap_lo=args.gap_lo, gap_hi=args.gap_hi,
        narrow_better_frac=args.narrow_better_frac, workers=args.workers,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bon_sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "series"])
        for p in points:
            writer.writerow([p.n, p.bon_mean, "bon"])
            writer.writerow([p.n, p.pbon_mean, "pbon"])
    (out_dir / "bon_sweep.json").write_text(
        json.dumps([vars(p).copy() for p in points], indent=2) + "\n"
    )

    for p in points:
        print(f"n={p.n:5d} BoN={p.bon_mean:.5f} ({p.bon_se:.5f})  "
              f"pBoN={p.pbon_mean:.5f} ({p.pbon_se:.5f})  diff={p.diff_mean:+.5f} ({p.diff_se:.5f})")
    logs = np.log([p.n for p in points])
    for name, means in (("BoN", [p.bon_mean for p in points]),
                        ("pBoN", [p.pbon_mean for p in points])):
        slope = float(np.polyfit(logs, np.log(means), 1)[0])
        print(f"{name} log-log slope vs n: {slope:.3f}")


if __name__ == "__main__":
    main()
