#!/usr/bin/env python3
"""Simulate the fitted lineup under the normal-only policy and print the
run distribution.

This is the reference point every sweep reports deltas against.  The
histogram goes to a runs,count CSV for plotting; a quick text rendering is
printed so the shape is visible without leaving the terminal.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from batsim.defaults import default_transition_table, fitted_lineup  # noqa: E402
from batsim.simulation import Lineup, monte_carlo  # noqa: E402
from batsim.strategies import always_normal  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-games", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="baseline_stats.json")
    ap.add_argument("--histogram-csv", default="baseline_hist.csv")
    args = ap.parse_args()

    lineup = Lineup.from_vectors(fitted_lineup().vectors)
    table = default_transition_table()
    stats = monte_carlo(lineup, always_normal, table, args.n_games, args.seed,
                        workers=args.workers)
    stats.save(args.out, csv_path=args.histogram_csv)

    print(f"normal-only baseline: {stats.mean:.4f} runs/game "
          f"(stderr {stats.stderr:.4f}, {stats.n_games} games)")
    peak = max(stats.histogram)
    for runs, count in enumerate(stats.histogram):
        if runs > 15 and count < stats.n_games / 10_000:
            print(f"  {runs:>3}+ tail omitted")
            break
        bar = "#" * max(1, round(40 * count / peak)) if count else ""
        print(f"  {runs:>3} {count:>7} {bar}")
    print(f"wrote {args.out} and {args.histogram_csv}")


if __name__ == "__main__":
    main()
