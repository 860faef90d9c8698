"""Command-line interface.

Subcommands cover the full pipeline: estimate a transition table from an
event log, compute run expectancy, train the strategy conversion model,
convert a single batter, simulate a season's worth of games, sweep strategy
or threshold grids, and validate a run distribution against a reference.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .abilities import (
    LEAGUE_AVERAGE,
    AbilityVector,
    AbilityVectorError,
    SlashTargets,
    dump_ability_vector,
    load_ability_vector,
    validate,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    dump_config,
    load_config,
    with_overrides,
)
from .conversion import (
    ConversionError,
    LossWeights,
    ProjectionFailureError,
    TrainConfig,
    build_pair_dataset,
    convert,
    dump_pair_csv,
    load_params,
    save_params,
    synthesize_players,
    train,
)
from .defaults import (
    bundled_lineup_targets,
    default_converter_params,
    default_transition_table,
    fitted_lineup,
)
from .simulation import Lineup, load_histogram_csv, monte_carlo
from .strategies import (
    ThresholdPolicyConfig,
    always_normal,
    build_triple,
    fixed_policy,
    threshold_policy,
)
from .sweeps import (
    mean_batter,
    run_strategy_grid,
    run_threshold_grid,
    total_variation,
    write_sweep_csv,
)
from .synthdata import synthesize_event_log
from .transitions import (
    EventLogError,
    GameState,
    NonAbsorbingError,
    TransitionTable,
    TransitionTableError,
    build_table,
    parse_event_log,
    run_expectancy,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


# ---------------------------------------------------------------- resolution

def _resolve_lineup(cfg: ExperimentConfig):
    lc = cfg.lineup
    if lc.source == "vectors":
        with open(lc.vectors_path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        if not isinstance(obj, list) or len(obj) != 9:
            raise ConfigError(f"{lc.vectors_path}: expected a JSON list of "
                              "9 ability vectors")
        return [validate(AbilityVector.from_json_dict(d)) for d in obj]
    if lc.targets_path is not None:
        with open(lc.targets_path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        targets = [SlashTargets(**row) for row in obj["targets"]]
        if len(targets) != 9:
            raise ConfigError(f"{lc.targets_path}: expected 9 target rows, "
                              f"got {len(targets)}")
    else:
        targets = bundled_lineup_targets()
    return list(fitted_lineup(targets).vectors)


def _resolve_table(cfg: ExperimentConfig) -> TransitionTable:
    tc = cfg.transitions
    if tc.source == "bundled":
        return default_transition_table()
    if tc.source == "simple":
        return TransitionTable(rows={}, min_count=0)
    if tc.source == "event-csv":
        parsed = parse_event_log(tc.event_csv, strict=True)
        return build_table(parsed.events, min_count=tc.min_count)
    events = synthesize_event_log(tc.synthetic_events, seed=tc.synthetic_seed)
    return build_table(events, min_count=tc.min_count)


def _resolve_params(cfg: ExperimentConfig):
    if cfg.converter.params_path is not None:
        return load_params(cfg.converter.params_path)
    return default_converter_params()


def _resolve_policy(cfg: ExperimentConfig, table, normals):
    """Returns (lineup, policy) for the configured policy kind."""
    pc = cfg.policy
    if pc.kind == "normal-only":
        return Lineup.from_vectors(normals), always_normal
    params = _resolve_params(cfg)
    triples = tuple(build_triple(v, params, pc.d_alpha, pc.d_woba)
                    for v in normals)
    lineup = Lineup(triples)
    if pc.kind == "fixed":
        return lineup, fixed_policy
    re_table = run_expectancy(table, mean_batter(normals))
    policy = threshold_policy(ThresholdPolicyConfig(pc.theta_o, pc.theta_l),
                              re_table)
    return lineup, policy


def _load_batter(path):
    if path is None:
        return LEAGUE_AVERAGE
    return load_ability_vector(path)


# ---------------------------------------------------------------- commands

def cmd_build_transitions(cfg: ExperimentConfig, args) -> int:
    out = args.out or "transitions.json"
    parsed = parse_event_log(args.events, strict=not args.lenient)
    if not parsed.events:
        raise EventLogError(f"{args.events}: no usable events")
    table = build_table(parsed.events,
                        min_count=args.min_count if args.min_count is not None
                        else cfg.transitions.min_count)
    table.save(out)
    print(f"built {len(table.rows)} transition rows from "
          f"{len(parsed.events)} events (coverage {table.coverage:.3f})")
    if parsed.rejected:
        print(f"rejected {len(parsed.rejected)} rows:")
        for lineno, reason in parsed.rejected[:10]:
            print(f"  line {lineno}: {reason}")
        if len(parsed.rejected) > 10:
            print(f"  ... and {len(parsed.rejected) - 10} more")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_compute_re(cfg: ExperimentConfig, args) -> int:
    out = args.out or "run_expectancy.json"
    table = _resolve_table(cfg)
    batter = _load_batter(args.batter)
    re_table = run_expectancy(table, batter)
    re_table.save(out)
    start = re_table.value(GameState(0, 0))
    print(f"run expectancy from (0 outs, bases empty): {start:.4f}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_train_converter(cfg: ExperimentConfig, args) -> int:
    out = args.out or "converter_params.json"
    n_players = args.players or cfg.converter.n_players
    seed = args.seed if args.seed is not None else cfg.converter.train_seed
    players = synthesize_players(n_players, seed=seed)
    pairs = build_pair_dataset(players)
    if args.pairs_csv:
        dump_pair_csv(pairs, args.pairs_csv)
        print(f"wrote {len(pairs)} training pairs to {args.pairs_csv}")
    params, metrics = train(pairs, TrainConfig(), seed=seed)
    save_params(params, out, loss_weights=LossWeights(), train_seed=seed)
    metrics_path = out + ".metrics.json"
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump({
            "n_players": n_players,
            "n_pairs": len(pairs),
            "mse_vector": metrics.mse_vector,
            "mse_woba": metrics.mse_woba,
            "neg_mass_projected": metrics.neg_mass_projected,
            "epochs_run": metrics.epochs_run,
            "best_epoch": metrics.best_epoch,
        }, fh, indent=2)
        fh.write("\n")
    print(f"trained on {len(pairs)} pairs from {n_players} players "
          f"({metrics.epochs_run} epochs)")
    print(f"validation: MSE(vector) {metrics.mse_vector:.3e}, "
          f"MSE(wOBA) {metrics.mse_woba:.3e}, "
          f"negative mass after projection {metrics.neg_mass_projected:.2e}")
    print(f"wrote {out} and {metrics_path}")
    return EXIT_OK


def cmd_convert(cfg: ExperimentConfig, args) -> int:
    if args.d_woba > 0:
        raise ConfigError(f"--d-woba must be <= 0, got {args.d_woba}")
    params = _resolve_params(cfg)
    batter = _load_batter(args.batter)
    result = convert(params, batter, args.d_alpha, args.d_woba)
    if args.out:
        dump_ability_vector(result, args.out)
        print(f"wrote {args.out}")
    else:
        json.dump(result.to_json_dict(), sys.stdout, indent=2)
        print()
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    out = args.out or "runstats.json"
    if args.policy:
        cfg = replace(cfg, policy=replace(cfg.policy, kind=args.policy))
        cfg.validate()
    table = _resolve_table(cfg)
    normals = _resolve_lineup(cfg)
    lineup, policy = _resolve_policy(cfg, table, normals)
    stats = monte_carlo(lineup, policy, table, cfg.n_games, cfg.seed,
                        workers=cfg.workers, innings=cfg.innings,
                        pa_cap=cfg.pa_cap)
    stats.save(out, csv_path=args.histogram_csv)
    print(f"policy {cfg.policy.kind}: mean {stats.mean:.4f} runs/game "
          f"(stderr {stats.stderr:.4f}) over {stats.n_games} games")
    if stats.truncated_games or stats.fallback_transitions:
        print(f"flags: {stats.truncated_games} truncated games, "
              f"{stats.fallback_transitions} fallback transitions")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    out = args.out or "sweep.csv"
    mode = args.mode or cfg.sweep.mode
    table = _resolve_table(cfg)
    normals = _resolve_lineup(cfg)
    params = _resolve_params(cfg)
    common = dict(n_games=cfg.n_games, seed=cfg.seed, workers=cfg.workers,
                  innings=cfg.innings, pa_cap=cfg.pa_cap)
    if mode == "strategy-grid":
        rows = run_strategy_grid(normals, params, table,
                                 d_alpha_grid=cfg.sweep.d_alpha_grid,
                                 d_woba_grid=cfg.sweep.d_woba_grid, **common)
    else:
        rows = run_threshold_grid(normals, params, table,
                                  theta_o_grid=cfg.sweep.theta_o_grid,
                                  theta_l_grid=cfg.sweep.theta_l_grid,
                                  d_alpha=cfg.sweep.threshold_d_alpha,
                                  d_woba=cfg.sweep.threshold_d_woba, **common)
    write_sweep_csv(rows, out)
    best = max(rows[1:], key=lambda r: r.mean_runs, default=rows[0])
    print(f"{mode}: {len(rows)} rows (baseline {rows[0].mean_runs:.4f}, "
          f"best {best.mean_runs:.4f})")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    out = args.out or "validate_hist.csv"
    reference = load_histogram_csv(args.reference)
    table = _resolve_table(cfg)
    normals = _resolve_lineup(cfg)
    lineup = Lineup.from_vectors(normals)
    stats = monte_carlo(lineup, always_normal, table, cfg.n_games, cfg.seed,
                        workers=cfg.workers, innings=cfg.innings,
                        pa_cap=cfg.pa_cap)
    ref_n = sum(reference)
    ref_mean = sum(r * c for r, c in enumerate(reference)) / ref_n
    tv = total_variation(stats.histogram, reference)
    width = max(len(stats.histogram), len(reference))
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("runs,count_sim,count_ref\n")
        for r in range(width):
            sim = stats.histogram[r] if r < len(stats.histogram) else 0
            ref = reference[r] if r < len(reference) else 0
            fh.write(f"{r},{sim},{ref}\n")
    print(f"simulated mean {stats.mean:.4f} over {stats.n_games} games; "
          f"reference mean {ref_mean:.4f} over {ref_n}")
    print(f"mean difference {stats.mean - ref_mean:+.4f}; "
          f"total variation distance {tv:.4f}")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="batsim",
        description="Batting-order strategy simulator.")
    parser.add_argument("--config", help="experiment config JSON")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--workers", type=int, help="override config workers")
    parser.add_argument("--out", help="primary output path")
    parser.add_argument("--print-config", action="store_true",
                        help="print the effective config and exit")

    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build-transitions",
                       help="estimate a transition table from an event CSV")
    p.add_argument("--events", required=True, help="event log CSV")
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--lenient", action="store_true",
                   help="skip malformed rows instead of failing")

    p = sub.add_parser("compute-re", help="run-expectancy table for a batter")
    p.add_argument("--batter", help="ability vector JSON (default: league average)")

    p = sub.add_parser("train-converter",
                       help="train the strategy conversion model")
    p.add_argument("--players", type=int, default=None,
                   help="synthetic pool size (default from config)")
    p.add_argument("--pairs-csv", help="also dump the training pairs")

    p = sub.add_parser("convert", help="convert one batter's ability vector")
    p.add_argument("--batter", help="ability vector JSON (default: league average)")
    p.add_argument("--d-alpha", type=float, required=True,
                   help="requested on-base share change (signed)")
    p.add_argument("--d-woba", type=float, required=True,
                   help="wOBA cost (must be <= 0)")

    p = sub.add_parser("simulate", help="simulate games under one policy")
    p.add_argument("--policy", choices=("normal-only", "fixed", "threshold"),
                   help="override config policy kind")
    p.add_argument("--histogram-csv", help="also write the runs histogram CSV")

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p.add_argument("--mode", choices=("strategy-grid", "threshold-grid"),
                   help="override config sweep mode")

    p = sub.add_parser("validate",
                       help="compare the baseline run distribution to a reference")
    p.add_argument("--reference", required=True, help="reference runs,count CSV")

    return parser


_COMMANDS = {
    "build-transitions": cmd_build_transitions,
    "compute-re": cmd_compute_re,
    "train-converter": cmd_train_converter,
    "convert": cmd_convert,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = with_overrides(cfg, seed=args.seed, workers=args.workers)
        if args.print_config:
            dump_config(cfg, sys.stdout)
            return EXIT_OK
        if args.command is None:
            parser.print_help()
            return EXIT_CONFIG
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonAbsorbingError, ProjectionFailureError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (EventLogError, TransitionTableError, ConversionError,
            AbilityVectorError, FileNotFoundError, json.JSONDecodeError,
            ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
