#!/usr/bin/env python3
"""Plot the running rate of escape from a walk CSV.

Reads a checkpointed walk dataset (produced by run_rate_of_escape.py or
`weylwalk walk ...`) and draws, for each coordinate of the chosen field,
the per-trajectory running rate value/n (thin lines) and the mean across
trajectories (thick line), with optional horizontal reference targets.

If matplotlib is unavailable the same numbers are printed as a text table,
so the script still works as a CSV summarizer on headless machines.

Examples:
    python3 scripts/plot_escape.py rank2.csv --out rank2.png --target 3/14,3/14
    python3 scripts/plot_escape.py tree.csv --field h --target 1/3
"""
import argparse
import sys
from collections import defaultdict
from fractions import Fraction as Q

sys.path.insert(0, "src")

from weylwalk.walks import WalkDataset


def running_rates(dataset: WalkDataset, field: str):
    """{coordinate: {n: [rate per trajectory]}} for n > 0 checkpoints."""
    rates: dict[int, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for traj in dataset.trajectories:
        for rec in traj.records:
            if rec.n == 0:
                continue
            values = getattr(rec, field)
            if values is None:
                raise ValueError(f"dataset has no {field!r} field")
            for i, v in enumerate(values):
                rates[i][rec.n].append(float(v) / rec.n)
    return rates


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="walk dataset CSV")
    ap.add_argument("--field", default="lam", choices=("lam", "h"))
    ap.add_argument("--out", default=None, help="PNG path (default: <csv>.png)")
    ap.add_argument(
        "--target", default=None,
        help="comma-separated exact rates to draw as reference lines",
    )
    args = ap.parse_args()

    with open(args.csv) as fh:
        dataset = WalkDataset.from_csv(fh.read())
    if dataset.kind == "reduced":
        ap.error("reduced-chain datasets have no escape rate; use an iso/group CSV")
    rates = running_rates(dataset, args.field)
    targets = (
        [float(Q(tok)) for tok in args.target.split(",")] if args.target else None
    )
    if targets is not None and len(targets) != len(rates):
        ap.error(f"expected {len(rates)} target values, got {len(targets)}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        for i in sorted(rates):
            print(f"coordinate {i + 1} ({args.field}/n):")
            for n in sorted(rates[i]):
                vals = rates[i][n]
                mean = sum(vals) / len(vals)
                print(f"  n={n:>8d}  mean={mean:+.5f}  trajectories={len(vals)}")
            if targets is not None:
                print(f"  target: {targets[i]:+.5f}")
        return 0

    fig, axes = plt.subplots(1, len(rates), figsize=(5 * len(rates), 4), squeeze=False)
    for i, ax in zip(sorted(rates), axes[0]):
        ns = sorted(rates[i])
        n_traj = max(len(v) for v in rates[i].values())
        for t in range(n_traj):
            ys = [rates[i][n][t] for n in ns if t < len(rates[i][n])]
            ax.plot(ns[: len(ys)], ys, lw=0.4, alpha=0.4, color="tab:blue")
        ax.plot(ns, [sum(rates[i][n]) / len(rates[i][n]) for n in ns],
                lw=2.0, color="tab:red", label="mean")
        if targets is not None:
            ax.axhline(targets[i], ls="--", color="k", lw=1.0, label="target")
        ax.set_xlabel("n")
        ax.set_ylabel(f"{args.field}_{i + 1}(X_n) / n")
        ax.legend()
    fig.suptitle(f"running rate of escape ({dataset.kind}, rank {dataset.rank})")
    fig.tight_layout()
    out = args.out or (args.csv.rsplit(".", 1)[0] + ".png")
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
