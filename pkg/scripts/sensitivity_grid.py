"""Mean-F1 sensitivity grid over model parameter pairs; writes a CSV and optionally a heatmap."""
import argparse
import sys

import numpy as np

from netcpd.detector import BootstrapConfig
from netcpd.evalbench import GridSpec, grid_csv, run_grid
from netcpd.metrics import MetricKind
from netcpd.synth import SizeDist


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=("er", "caveman"), default="er")
    ap.add_argument("--metric", choices=("ks", "kl", "rh"), default="ks")
    ap.add_argument("--values", default="0.05:1.0:0.05", help="start:stop:step (inclusive) or comma list")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--changes", type=int, default=20)
    ap.add_argument("--size-var", type=float, default=10.0)
    ap.add_argument("--alpha", type=float, default=0.90)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="grid.csv")
    ap.add_argument("--plot", help="also save a heatmap (needs matplotlib)")
    args = ap.parse_args()

    if ":" in args.values:
        lo, hi, step = map(float, args.values.split(":"))
        values = tuple(round(v, 6) for v in np.arange(lo, hi + step / 2, step))
    else:
        values = tuple(float(v) for v in args.values.split(","))
    grid = GridSpec(args.model, values, SizeDist("normal", 100, args.size_var), args.trials, args.changes)
    cfg = BootstrapConfig(alpha=args.alpha, seed=args.seed)

    def progress(cell, f1):
        print(f"{cell[0]:g} -> {cell[1]:g}: F1 {f1:.3f}", file=sys.stderr)

    m = run_grid(grid, MetricKind(args.metric), cfg, progress=progress)
    with open(args.out, "w") as fh:
        fh.write(grid_csv(m))
    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        k = len(values)
        img = np.full((k, k), np.nan)
        for (p1, p2), f1 in m.items():
            img[values.index(p1), values.index(p2)] = f1
        fig, ax = plt.subplots(figsize=(6, 5))
        im = ax.imshow(img, origin="lower", vmin=0, vmax=1, cmap="viridis")
        ax.set_xticks(range(k), [f"{v:g}" for v in values], rotation=90)
        ax.set_yticks(range(k), [f"{v:g}" for v in values])
        ax.set_xlabel("p2")
        ax.set_ylabel("p1")
        fig.colorbar(im, label="mean F1")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
