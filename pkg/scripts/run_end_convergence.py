#!/usr/bin/env python3
"""Hit statistics for the reduced two-coordinate chain (X-bar, Y).

Streams seeded runs of the reduced chain, pools the increments of Y observed
while the chain sits on the diagonal X-bar = Y (the hitting set), and prints
a JSON report: the pooled mean against its exact value (1 - 1/q) * p_plus,
the count of invariant violations (Y >= X-bar must always hold), and the
fraction of runs whose final Y clears the escape threshold.

Hits accumulate on the diffusive time scale (about sqrt(N) of them per run
for the symmetric chain), so long runs and pooling across runs are both
needed for a tight estimate.

Example:
    python3 scripts/run_end_convergence.py --steps 1000000 --runs 50
"""
import argparse
import json
import sys
from fractions import Fraction as Q

sys.path.insert(0, "src")

from weylwalk.analysis import reduced_chain_hit_statistics
from weylwalk.walks import ReducedChainConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--p-plus", default="1/2")
    ap.add_argument("--p-zero", default="0")
    ap.add_argument("--p-minus", default="1/2")
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=808)
    ap.add_argument("--y-threshold", type=int, default=50)
    ap.add_argument("--serial", action="store_true", help="disable worker pool")
    args = ap.parse_args()

    config = ReducedChainConfig(
        q=args.q,
        p_plus=Q(args.p_plus),
        p_zero=Q(args.p_zero),
        p_minus=Q(args.p_minus),
        drift_free=Q(args.p_plus) == Q(args.p_minus),
    )
    report = reduced_chain_hit_statistics(
        config,
        args.steps,
        args.runs,
        base_seed=args.seed,
        y_threshold=args.y_threshold,
        parallel=not args.serial,
    )
    out = {
        "q": args.q,
        "steps": args.steps,
        "runs": args.runs,
        "hit_count": report.hit_count,
        "mean_z_at_hits": report.mean_z_at_hits,
        "theoretical_e": report.theoretical_e,
        "invariant_violations": report.invariant_violations,
        "max_y": report.max_y,
        "y_threshold": report.y_threshold,
        "fraction_reaching_threshold": report.fraction_reaching_threshold,
    }
    print(json.dumps(out, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
