#!/usr/bin/env python3
"""Mean squared parameter error over a grid of sample sizes and iteration
counts; writes tidy CSV for plotting plus a JSON dump."""

import argparse
import csv
import json
from pathlib import Path

from hetpref import FitConfig, SimSpec, error_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-grid", default="200,400,600,1200")
    ap.add_argument("--t-grid", default="1,10,50,200,500,1000,2000,4000")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20250811)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    n_grid = [int(v) for v in args.n_grid.split(",")]
    t_grid = [int(v) for v in args.t_grid.split(",")]
    fit = FitConfig(init_theta=[0.0] * 3, init_gamma=[0.0] * 2)
    curve = error_curves(
        SimSpec(n=n_grid[0], seed=args.seed), fit,
        n_grid=n_grid, t_grid=t_grid, trials=args.trials, workers=args.workers,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "error_curves.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "series"])
        for (n, t), err in zip(curve.grid, curve.errors):
            writer.writerow([t, err, f"n={n}"])
    (out_dir / "error_curves.json").write_text(json.dumps({
        "trials": curve.trials,
        "points": [{"n": n, "iters": t, "mean_sq_error": e}
                   for (n, t), e in zip(curve.grid, curve.errors)],
    }, indent=2) + "\n")
    for (n, t), err in zip(curve.grid, curve.errors):
        print(f"n={n:5d} iters={t:5d} mse={err:.5f}")


if __name__ == "__main__":
    main()
