"""Designed experiments exp1-exp3: mean/std precision and recall over trials."""
import argparse
import json

from netcpd.evalbench import run_experiment
from netcpd.metrics import MetricKind


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--changes", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.90, 0.99])
    ap.add_argument("--metric", default="ks")
    ap.add_argument("--resample-size", default="effective")
    ap.add_argument("--json", action="store_true", help="print records instead of a table")
    args = ap.parse_args()
    rs = int(args.resample_size) if args.resample_size.isdigit() else args.resample_size

    rows = []
    for name in ("exp1", "exp2", "exp3"):
        for a in args.alpha:
            s = run_experiment(name, trials=args.trials, seed=args.seed, alpha=a, n_changes=args.changes,
                               metric=MetricKind(args.metric), resample_size=rs)
            rows.append({"experiment": name, "alpha": a, **s.as_record()})
    if args.json:
        for r in rows:
            print(json.dumps(r))
        return
    print(f"{'exp':5} {'alpha':>5}  {'precision':>15}  {'recall':>15}")
    for r in rows:
        print(f"{r['experiment']:5} {r['alpha']:5.2f}  {r['precision_mean']:.3f} +- {r['precision_std']:.3f}"
              f"  {r['recall_mean']:.3f} +- {r['recall_std']:.3f}")


if __name__ == "__main__":
    main()
