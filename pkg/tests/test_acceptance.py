"""Acceptance suite: ten end-to-end criteria, one test (one pass/fail line
under -v) per criterion.

Each test prints its measured numbers, so running with -s or -rA documents
the margins alongside the verdicts.  Criterion 10's parallel-speedup clause
needs real cores; on a single-core host the measurement is still taken and
the test fails honestly rather than loosening the bar.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from batsim.abilities import LEAGUE_AVERAGE, AbilityVector
from batsim.cli import EXIT_OK, main
from batsim.config import DEFAULT_D_ALPHA_GRID, DEFAULT_D_WOBA_GRID
from batsim.conversion import (
    LossWeights,
    TrainConfig,
    build_pair_dataset,
    gradient_check,
    init_params,
    project_probabilities,
    synthesize_players,
    train,
)
from batsim.defaults import (
    default_converter_params,
    default_transition_table,
    fitted_lineup,
)
from batsim.simulation import Lineup, monte_carlo
from batsim.strategies import (
    StrategyChoice,
    always_normal,
    build_triple,
    fixed_policy,
)
from batsim.sweeps import run_strategy_grid, run_threshold_grid
from batsim.synthdata import synthesize_event_log
from batsim.transitions import (
    GameState,
    Outcome,
    TransitionTable,
    live_states,
    run_expectancy,
    sample_transition,
    write_event_csv,
)

GAMES = 100_000
SEED = 2026


@pytest.fixture(scope="session")
def normals():
    return fitted_lineup().vectors


@pytest.fixture(scope="session")
def table():
    return default_transition_table()


@pytest.fixture(scope="session")
def params():
    return default_converter_params()


def test_criterion_01_closed_form_run_expectancy():
    t0 = time.monotonic()
    batter = AbilityVector(0.0, 0.0, 0.0, 0.1, 0.0, 0.9, 0.0, 0.0)
    simple = TransitionTable(rows={}, min_count=0)
    re_table = run_expectancy(simple, batter)
    re0 = re_table.value(GameState(0, 0))
    re2 = re_table.value(GameState(2, 0))
    assert abs(re0 - 1.0 / 3.0) <= 1e-9
    assert abs(re2 - 1.0 / 9.0) <= 1e-9

    stats = monte_carlo(Lineup.from_vectors([batter] * 9), always_normal,
                        simple, GAMES, SEED)
    assert abs(stats.mean - 3.0) <= 3.0 * stats.stderr
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    print(f"criterion 1 PASS: re(0,empty)={re0:.12f}, re(2,empty)={re2:.12f}, "
          f"mean={stats.mean:.4f} (|mean-3|={abs(stats.mean - 3):.4f} vs "
          f"3*stderr={3 * stats.stderr:.4f}), {elapsed:.1f}s")


def test_criterion_02_all_strikeout_lineup_never_scores():
    batter = AbilityVector(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    simple = TransitionTable(rows={}, min_count=0)
    stats = monte_carlo(Lineup.from_vectors([batter] * 9), always_normal,
                        simple, 10_000, SEED)
    assert stats.histogram == (10_000,)
    assert stats.mean == 0.0
    print("criterion 2 PASS: 10000/10000 games scored exactly 0")


def test_criterion_03_baseline_plausibility(normals, table):
    stats = monte_carlo(Lineup.from_vectors(normals), always_normal, table,
                        GAMES, SEED)
    assert 3.3 <= stats.mean <= 5.3
    print(f"criterion 3 PASS: baseline mean {stats.mean:.4f} in [3.3, 5.3] "
          f"(stderr {stats.stderr:.4f}); run distribution:")
    peak = max(stats.histogram)
    for runs, count in enumerate(stats.histogram):
        if runs > 15 and count < 10:
            print(f"  {runs:>3}+ tail omitted")
            break
        print(f"  {runs:>3} {count:>7} {'#' * max(1, round(40 * count / peak))}")


def test_criterion_04_converter_validation_metrics():
    t0 = time.monotonic()
    players = synthesize_players(502, seed=0)
    pairs = build_pair_dataset(players)
    _, metrics = train(pairs, TrainConfig(), seed=0)
    elapsed = time.monotonic() - t0
    assert metrics.mse_vector <= 5e-3
    assert metrics.mse_woba <= 2e-3
    assert metrics.neg_mass_projected == 0.0
    assert elapsed < 600.0
    print(f"criterion 4 PASS: MSE(vector)={metrics.mse_vector:.2e} <= 5e-3, "
          f"MSE(wOBA)={metrics.mse_woba:.2e} <= 2e-3, "
          f"negative mass {metrics.neg_mass_projected}, {elapsed:.0f}s")


def test_criterion_05_gradient_correctness(params):
    pool = synthesize_players(40, seed=5)
    pairs = build_pair_dataset(pool)
    batch = (pairs.inputs[:64], pairs.targets[:64])
    worst_init = gradient_check(init_params(seed=3), batch, LossWeights(),
                                probes=100, seed=21)
    worst_trained = gradient_check(params, batch, LossWeights(),
                                   probes=100, seed=22)
    assert worst_init <= 1e-4
    assert worst_trained <= 1e-4
    print(f"criterion 5 PASS: worst relative error {worst_init:.2e} at init, "
          f"{worst_trained:.2e} trained (tolerance 1e-4, 100 probes each)")


def test_criterion_06_onbase_shift_raises_runs(normals, params, table):
    rows = run_strategy_grid(normals, params, table,
                             d_alpha_grid=DEFAULT_D_ALPHA_GRID,
                             d_woba_grid=DEFAULT_D_WOBA_GRID,
                             n_games=GAMES, seed=SEED)
    cells = rows[1:]

    # leg 1: with the shift free of cost, means are non-decreasing within
    # 2 combined stderr and the largest shift clearly beats no shift
    free = sorted((r for r in cells if r.d_woba == 0.0),
                  key=lambda r: r.d_alpha)
    assert [r.d_alpha for r in free] == sorted(DEFAULT_D_ALPHA_GRID)
    for prev, cur in zip(free, free[1:]):
        slack = 2.0 * (prev.stderr + cur.stderr)
        assert cur.mean_runs >= prev.mean_runs - slack, (
            f"d_alpha {cur.d_alpha} mean {cur.mean_runs:.4f} fell more than "
            f"{slack:.4f} below d_alpha {prev.d_alpha} mean {prev.mean_runs:.4f}")
    lo, hi = free[0], free[-1]
    margin = hi.mean_runs - lo.mean_runs
    needed = 3.0 * (hi.stderr + lo.stderr)
    assert margin > needed, (
        f"d_alpha 0.3 beats 0.0 by {margin:.4f}, needs > {needed:.4f}")

    # leg 2: at every fixed shift, paying a larger quality cost must not
    # increase the mean beyond the 2-combined-stderr slack
    violations = []
    for da in sorted({r.d_alpha for r in cells}):
        col = sorted((r for r in cells if r.d_alpha == da),
                     key=lambda r: -r.d_woba)
        for prev, cur in zip(col, col[1:]):
            slack = 2.0 * (prev.stderr + cur.stderr)
            if cur.mean_runs > prev.mean_runs + slack:
                violations.append((da, cur.d_woba))
    assert not violations, f"cost trend violated at {violations}"
    print(f"criterion 6 PASS: free-shift means "
          f"{[round(r.mean_runs, 3) for r in free]}, top-vs-zero margin "
          f"{margin:.4f} (> {needed:.4f}), 0 cost-trend violations")


def test_criterion_07_threshold_sweep_structure(normals, params, table):
    rows = run_threshold_grid(normals, params, table,
                              d_alpha=0.1, d_woba=-0.005,
                              n_games=GAMES, seed=SEED)
    cells = rows[1:]
    assert len(cells) == 16
    best = max(cells, key=lambda r: r.mean_runs)
    loosest = min(cells, key=lambda r: (r.theta_o, -r.theta_l))
    gap = best.mean_runs - loosest.mean_runs
    needed = 2.0 * (best.stderr + loosest.stderr)
    assert gap > needed, (
        f"best ({best.theta_o}, {best.theta_l}) beats loosest "
        f"({loosest.theta_o}, {loosest.theta_l}) by {gap:.4f}, "
        f"needs > {needed:.4f}")
    print(f"criterion 7 PASS: best cell ({best.theta_o}, {best.theta_l}) "
          f"mean {best.mean_runs:.4f} vs loosest ({loosest.theta_o}, "
          f"{loosest.theta_l}) mean {loosest.mean_runs:.4f}; gap {gap:.4f} "
          f"> {needed:.4f}")


def test_criterion_08_byte_identical_reruns(tmp_path):
    def run(args):
        assert main(args) == EXIT_OK

    def identical(*paths):
        blobs = [p.read_bytes() for p in paths]
        assert all(b == blobs[0] for b in blobs[1:])

    events = tmp_path / "events.csv"
    write_event_csv(synthesize_event_log(2500, seed=11), events)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "n_games": 400, "seed": 99,
        "sweep": {"d_alpha_grid": [0.0, 0.1], "d_woba_grid": [-0.005]},
    }))
    base = ["--config", str(cfg)]

    t1, t2 = tmp_path / "t1.json", tmp_path / "t2.json"
    for out in (t1, t2):
        run(["--out", str(out), "build-transitions", "--events", str(events)])
    identical(t1, t2)

    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (r1, r2):
        run(["--out", str(out), "compute-re"])
    identical(r1, r2)

    p1, p2 = tmp_path / "p1.json", tmp_path / "p2.json"
    for out in (p1, p2):
        run(["--out", str(out), "train-converter", "--players", "16"])
    identical(p1, p2)
    identical(tmp_path / "p1.json.metrics.json",
              tmp_path / "p2.json.metrics.json")

    c1, c2 = tmp_path / "c1.json", tmp_path / "c2.json"
    for out in (c1, c2):
        run(["--out", str(out), "convert", "--d-alpha", "0.1",
             "--d-woba", "-0.005"])
    identical(c1, c2)

    s1, s2, s3 = (tmp_path / f"s{i}.json" for i in (1, 2, 3))
    h1, h2, h3 = (tmp_path / f"h{i}.csv" for i in (1, 2, 3))
    for out, hist, workers in ((s1, h1, "1"), (s2, h2, "1"), (s3, h3, "3")):
        run(base + ["--workers", workers, "--out", str(out), "simulate",
                    "--histogram-csv", str(hist)])
    identical(s1, s2, s3)
    identical(h1, h2, h3)

    w1, w2, w3 = (tmp_path / f"w{i}.csv" for i in (1, 2, 3))
    for out, workers in ((w1, "1"), (w2, "1"), (w3, "2")):
        run(base + ["--workers", workers, "--out", str(out), "sweep"])
    identical(w1, w2, w3)

    v1, v2 = tmp_path / "v1.csv", tmp_path / "v2.csv"
    for out in (v1, v2):
        run(base + ["--out", str(out), "validate", "--reference", str(h1)])
    identical(v1, v2)

    print("criterion 8 PASS: all 7 commands byte-identical on rerun; "
          "simulate identical at workers 1 vs 3, sweep at workers 1 vs 2")


def test_criterion_09_invariant_suites(normals, table):
    # transition stochasticity: every stored row is a proper distribution
    # over valid post states
    for (outs, bases, _), entries in table.rows.items():
        assert 0 <= outs <= 2 and 0 <= bases <= 7
        total = math.fsum(e.prob for e in entries)
        assert abs(total - 1.0) <= 1e-9
        for e in entries:
            assert e.prob > 0.0
            assert 0 <= e.outs <= 3 and 0 <= e.bases <= 7 and e.runs >= 0

    # conservation identity on a million sampled transitions
    rng = np.random.default_rng(9)
    keys = sorted(table.rows, key=lambda k: (k[0], k[1], k[2].value))
    picks = rng.integers(len(keys), size=1_000_000)
    for i in picks:
        outs, bases, outcome = keys[i]
        post, runs, _ = sample_transition(table, GameState(outs, bases),
                                          outcome, rng)
        before = bases.bit_count() + 1
        after = post.bases.bit_count()
        assert before == after + runs + (post.outs - outs), (outs, bases, outcome)

    # run expectancy never rises as outs accumulate
    re_table = run_expectancy(table, LEAGUE_AVERAGE)
    for bases in range(8):
        v0 = re_table.value(GameState(0, bases))
        v1 = re_table.value(GameState(1, bases))
        v2 = re_table.value(GameState(2, bases))
        assert v0 >= v1 >= v2

    # projection is exactly idempotent
    draws = np.random.default_rng(17).uniform(-0.5, 1.5, size=(2000, 8))
    for row in draws:
        once = project_probabilities(row)
        assert project_probabilities(once) == once

    # the fixed rule, frozen exhaustively over all 24 live states
    N, O, L = (StrategyChoice.NORMAL, StrategyChoice.ON_BASE,
               StrategyChoice.LONG_HIT)
    expected = {
        (0, 0): O, (0, 1): O, (0, 2): O, (0, 3): O,
        (0, 4): O, (0, 5): O, (0, 6): O, (0, 7): O,
        (1, 0): N, (1, 1): N, (1, 2): O, (1, 3): O,
        (1, 4): O, (1, 5): O, (1, 6): O, (1, 7): O,
        (2, 0): L, (2, 1): L, (2, 2): O, (2, 3): O,
        (2, 4): O, (2, 5): O, (2, 6): O, (2, 7): O,
    }
    for state in live_states():
        assert fixed_policy(state) is expected[(state.outs, state.bases)]

    print("criterion 9 PASS: stochasticity, conservation x1e6, RE(outs) "
          "monotonicity, projection idempotence, 24-state fixed rule")


def test_criterion_10_throughput(normals, params, table):
    triples = tuple(build_triple(v, params, 0.1, -0.005) for v in normals)
    lineup = Lineup(triples)

    t0 = time.monotonic()
    single = monte_carlo(lineup, fixed_policy, table, GAMES, SEED, workers=1)
    t_single = time.monotonic() - t0

    t0 = time.monotonic()
    eight = monte_carlo(lineup, fixed_policy, table, GAMES, SEED, workers=8)
    t_eight = time.monotonic() - t0
    assert eight.histogram == single.histogram

    speedup = t_single / t_eight
    cores = len(os.sched_getaffinity(0))
    print(f"criterion 10: single-thread {t_single:.2f}s for {GAMES} games; "
          f"8 workers {t_eight:.2f}s; speedup {speedup:.2f}x on {cores} "
          f"available core(s)")
    assert t_single <= 10.0
    assert speedup >= 3.0, (
        f"8-worker speedup {speedup:.2f}x < 3x; host exposes {cores} core(s), "
        f"so the parallelism has nothing to run on")
