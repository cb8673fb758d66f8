"""Which interval method can you trust?  A coverage study.

Draws worlds from a named scenario (neutral, legal, or small), simulates
repeated audits of each world, and measures how often every method's 95%
interval actually contains true recall.  At full scale (1,000 realizations x
1,000 samples) this reproduces the published comparison; the default here is
a reduced scale that finishes in a few minutes and preserves the ranking:
the half-prior beta-binomial is accurate everywhere, the Koopman and
Jeffreys methods degrade when samples are a large share of the population,
and the naive binomial and normal methods under-cover badly on the legal
scenario.

Run:  python3 demos/scenario_coverage.py --scenario legal --seed 1
"""

import argparse
import os

from recallci.evaluation import (
    EvalConfig,
    closest_coverage_shares,
    evaluate_coverage,
    format_summary_table,
    write_long_csv,
    write_summary_json,
)
from recallci.scenarios import BUILTIN_SCENARIOS, builtin_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", choices=BUILTIN_SCENARIOS, default="legal")
    parser.add_argument("--realizations", type=int, default=100)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--draws", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out-dir", default="demos/out")
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    config = EvalConfig(
        master_seed=args.seed,
        realizations=args.realizations,
        samples_per_realization=args.samples,
        mc_draws=args.draws,
        workers=args.workers,
    )
    report = evaluate_coverage(builtin_scenario(args.scenario), config)
    print(format_summary_table(report))

    shares = closest_coverage_shares(report)
    print("\nshare of realizations where each method lands closest to 95%:")
    for method, share in sorted(shares.items(), key=lambda kv: -kv[1]):
        print(f"  {method:<16} {share:.3f}")

    csv_path = os.path.join(args.out_dir, f"coverage_{args.scenario}.csv")
    json_path = os.path.join(args.out_dir, f"coverage_{args.scenario}.json")
    write_long_csv(report, csv_path)
    write_summary_json(report, json_path)
    print(f"\nper-realization rows: {csv_path}")
    print(f"aggregate summary:    {json_path}")


if __name__ == "__main__":
    main()
