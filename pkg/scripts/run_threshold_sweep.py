#!/usr/bin/env python3
"""Sweep the threshold-activation policy over a (theta_o, theta_l) grid.

The grids default to run-expectancy quantiles of the lineup's average
batter.  Prints each cell and compares the best cell to the loosest one
(the valid cell that triggers strategy switches most often: lowest on-base
threshold with the highest long-hit threshold).
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from batsim.defaults import (  # noqa: E402
    default_converter_params,
    default_transition_table,
    fitted_lineup,
)
from batsim.sweeps import (  # noqa: E402
    default_theta_grids,
    mean_batter,
    run_threshold_grid,
    write_sweep_csv,
)
from batsim.transitions import run_expectancy  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-games", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--d-alpha", type=float, default=0.1)
    ap.add_argument("--d-woba", type=float, default=-0.005)
    ap.add_argument("--out", default="sweep_threshold.csv")
    args = ap.parse_args()

    normals = fitted_lineup().vectors
    table = default_transition_table()
    re_table = run_expectancy(table, mean_batter(normals))
    theta_o_grid, theta_l_grid = default_theta_grids(re_table)
    print(f"theta_o grid: {theta_o_grid}")
    print(f"theta_l grid: {theta_l_grid}")

    rows = run_threshold_grid(
        normals, default_converter_params(), table,
        theta_o_grid=theta_o_grid, theta_l_grid=theta_l_grid,
        d_alpha=args.d_alpha, d_woba=args.d_woba,
        n_games=args.n_games, seed=args.seed, workers=args.workers,
        re_table=re_table)
    write_sweep_csv(rows, args.out)

    print(f"baseline {rows[0].mean_runs:.4f} runs/game")
    cells = rows[1:]
    for r in cells:
        print(f"  theta_o {r.theta_o:.4f} theta_l {r.theta_l:.4f}: "
              f"{r.mean_runs:.4f} ({r.delta_vs_baseline:+.4f})")
    best = max(cells, key=lambda r: r.mean_runs)
    loosest = min(cells, key=lambda r: (r.theta_o, -r.theta_l))
    gap = best.mean_runs - loosest.mean_runs
    combined = best.stderr + loosest.stderr
    print(f"best ({best.theta_o:.4f}, {best.theta_l:.4f}) beats loosest "
          f"({loosest.theta_o:.4f}, {loosest.theta_l:.4f}) by {gap:+.4f} "
          f"({gap / combined:.1f}x combined stderr)")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
