"""End-to-end CLI tests: every subcommand through main(), exit codes on the
documented error classes, and reproducibility of file outputs."""

import json

import numpy as np
import pytest

from batsim.abilities import LEAGUE_AVERAGE, dump_ability_vector
from batsim.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_RUNTIME, main
from batsim.conversion import (
    PAIR_CSV_HEADER,
    ConverterParams,
    load_params,
    save_params,
)
from batsim.simulation import RunStats
from batsim.sweeps import SWEEP_CSV_HEADER
from batsim.synthdata import synthesize_event_log
from batsim.transitions import TransitionTable, write_event_csv


def write_config(path, **over):
    obj = {"n_games": 400, "seed": 99, "workers": 1}
    obj.update(over)
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture()
def cfg_path(tmp_path):
    return write_config(tmp_path / "cfg.json",
                        policy={"kind": "normal-only"})


@pytest.fixture(scope="session")
def events_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("events") / "events.csv"
    write_event_csv(synthesize_event_log(3000, seed=11), path)
    return str(path)


# ---------------------------------------------------------------- global flags

def test_print_config_defaults(capsys):
    assert main(["--print-config"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["n_games"] == 100000
    assert obj["policy"]["kind"] == "fixed"


def test_print_config_applies_overrides(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", seed=5)
    assert main(["--config", cfg, "--seed", "7", "--workers", "3",
                 "--print-config"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["seed"] == 7
    assert obj["workers"] == 3
    assert obj["n_games"] == 400


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_CONFIG
    assert "usage:" in capsys.readouterr().out


def test_missing_config_file(tmp_path, capsys):
    rc = main(["--config", str(tmp_path / "nope.json"), "--print-config"])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text('{"ngames": 10}')
    assert main(["--config", str(path), "--print-config"]) == EXIT_CONFIG
    assert "ngames" in capsys.readouterr().err


def test_invalid_json_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert main(["--config", str(path), "--print-config"]) == EXIT_CONFIG


# ---------------------------------------------------------------- simulate

def test_simulate_normal_only(cfg_path, tmp_path, capsys):
    out = tmp_path / "stats.json"
    hist = tmp_path / "hist.csv"
    rc = main(["--config", cfg_path, "--out", str(out), "simulate",
               "--histogram-csv", str(hist)])
    assert rc == EXIT_OK
    stats = RunStats.load(out)
    assert stats.n_games == 400
    assert 0.0 < stats.mean < 15.0
    lines = hist.read_text().splitlines()
    assert lines[0] == "runs,count"
    assert sum(int(l.split(",")[1]) for l in lines[1:]) == 400
    assert "mean" in capsys.readouterr().out


def test_simulate_fixed_policy(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", n_games=200)
    out = tmp_path / "stats.json"
    assert main(["--config", cfg, "--out", str(out), "simulate"]) == EXIT_OK
    assert RunStats.load(out).n_games == 200


def test_simulate_threshold_policy(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.json", n_games=200,
        policy={"kind": "threshold", "theta_o": 1.5, "theta_l": 0.3})
    out = tmp_path / "stats.json"
    assert main(["--config", cfg, "--out", str(out), "simulate"]) == EXIT_OK


def test_simulate_threshold_override_needs_thetas(cfg_path, tmp_path, capsys):
    rc = main(["--config", cfg_path, "--out", str(tmp_path / "s.json"),
               "simulate", "--policy", "threshold"])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_simulate_seed_changes_histogram(cfg_path, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["--config", cfg_path, "--seed", "1", "--out", str(a),
                 "simulate"]) == EXIT_OK
    assert main(["--config", cfg_path, "--seed", "2", "--out", str(b),
                 "simulate"]) == EXIT_OK
    assert a.read_bytes() != b.read_bytes()


def test_simulate_worker_count_invariant(cfg_path, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["--config", cfg_path, "--workers", "1", "--out", str(a),
                 "simulate"]) == EXIT_OK
    assert main(["--config", cfg_path, "--workers", "2", "--out", str(b),
                 "simulate"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------- build-transitions

def test_build_transitions(events_csv, tmp_path, capsys):
    out = tmp_path / "table.json"
    rc = main(["--out", str(out), "build-transitions", "--events", events_csv])
    assert rc == EXIT_OK
    table = TransitionTable.load(out)
    assert len(table.rows) > 50
    assert "coverage" in capsys.readouterr().out


def test_build_transitions_header_only(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("outs_pre,bases_pre,outcome,outs_post,bases_post,runs\n")
    rc = main(["--out", str(tmp_path / "t.json"), "build-transitions",
               "--events", str(path)])
    assert rc == EXIT_DATA
    assert "data error" in capsys.readouterr().err


def test_build_transitions_wrong_header(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("outs,bases,outcome,outs_post,bases_post,runs\n"
                    "0,0,HR,0,0,1\n")
    rc = main(["--out", str(tmp_path / "t.json"), "build-transitions",
               "--events", str(path)])
    assert rc == EXIT_DATA
    assert "line 1" in capsys.readouterr().err


def test_build_transitions_malformed_strict(tmp_path, capsys):
    path = tmp_path / "events.csv"
    path.write_text("outs_pre,bases_pre,outcome,outs_post,bases_post,runs\n"
                    "0,0,HR,0,0,1\n"
                    "0,0,HR,0,0\n")
    rc = main(["--out", str(tmp_path / "t.json"), "build-transitions",
               "--events", str(path)])
    assert rc == EXIT_DATA
    assert "line 3" in capsys.readouterr().err


def test_build_transitions_malformed_lenient(tmp_path, capsys):
    path = tmp_path / "events.csv"
    path.write_text("outs_pre,bases_pre,outcome,outs_post,bases_post,runs\n"
                    "0,0,HR,0,0,1\n"
                    "0,0,HR,0,0\n"
                    "1,3,K,2,3,0\n")
    out = tmp_path / "t.json"
    rc = main(["--out", str(out), "build-transitions", "--events", str(path),
               "--lenient", "--min-count", "1"])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "rejected 1 rows" in text
    assert "line 3" in text
    assert len(TransitionTable.load(out).rows) == 2


# ---------------------------------------------------------------- compute-re

def test_compute_re_league_average(tmp_path, capsys):
    out = tmp_path / "re.json"
    assert main(["--out", str(out), "compute-re"]) == EXIT_OK
    obj = json.loads(out.read_text())
    assert len(obj) == 24
    assert "0-0" in obj and "2-7" in obj
    assert all(v >= 0.0 for v in obj.values())
    # more outs cannot raise the expected remaining runs
    for bases in range(8):
        assert obj[f"0-{bases}"] >= obj[f"1-{bases}"] >= obj[f"2-{bases}"]
    assert "run expectancy" in capsys.readouterr().out


def test_compute_re_custom_batter(tmp_path):
    batter = tmp_path / "batter.json"
    dump_ability_vector(LEAGUE_AVERAGE, batter)
    out = tmp_path / "re.json"
    assert main(["--out", str(out), "compute-re",
                 "--batter", str(batter)]) == EXIT_OK


def test_compute_re_missing_batter_file(tmp_path, capsys):
    rc = main(["--out", str(tmp_path / "re.json"), "compute-re",
               "--batter", str(tmp_path / "nope.json")])
    assert rc == EXIT_DATA


# ---------------------------------------------------------------- train-converter

def test_train_converter_reproducible(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["--out", str(a), "train-converter", "--players", "30"]) == EXIT_OK
    assert main(["--out", str(b), "train-converter", "--players", "30"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    metrics = json.loads((tmp_path / "a.json.metrics.json").read_text())
    assert metrics["n_players"] == 30
    assert metrics["n_pairs"] == 30 * 29 // 2
    assert metrics["mse_vector"] < 1e-2
    load_params(a)  # round-trips through the loader's shape checks


def test_train_converter_seed_changes_params(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["--seed", "1", "--out", str(a), "train-converter",
                 "--players", "30"]) == EXIT_OK
    assert main(["--seed", "2", "--out", str(b), "train-converter",
                 "--players", "30"]) == EXIT_OK
    assert a.read_bytes() != b.read_bytes()


def test_train_converter_dumps_pairs(tmp_path):
    pairs = tmp_path / "pairs.csv"
    rc = main(["--out", str(tmp_path / "p.json"), "train-converter",
               "--players", "12", "--pairs-csv", str(pairs)])
    assert rc == EXIT_OK
    lines = pairs.read_text().splitlines()
    assert lines[0] == PAIR_CSV_HEADER
    assert len(lines) == 12 * 11 // 2 + 1


# ---------------------------------------------------------------- convert

def test_convert_stdout(capsys):
    rc = main(["convert", "--d-alpha", "0.05", "--d-woba", "-0.005"])
    assert rc == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    probs = list(obj.values())
    assert len(probs) == 8
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert all(0.0 <= p <= 1.0 for p in probs)


def test_convert_to_file(tmp_path):
    out = tmp_path / "converted.json"
    rc = main(["--out", str(out), "convert",
               "--d-alpha", "0.1", "--d-woba", "-0.01"])
    assert rc == EXIT_OK
    obj = json.loads(out.read_text())
    assert sum(obj.values()) == pytest.approx(1.0, abs=1e-9)


def test_convert_rejects_positive_dwoba(capsys):
    rc = main(["convert", "--d-alpha", "0.1", "--d-woba", "0.01"])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_convert_projection_failure(tmp_path, capsys):
    # biases push single mass far past the unit sum and both out components
    # negative, so strikeouts, ground outs, and the fly-out residual all
    # clamp to zero: the projected vector cannot end an inning
    z = np.zeros
    b3 = np.array([5.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0])
    broken = ConverterParams(w1=z((9, 100)), b1=z(100), w2=z((100, 100)),
                             b2=z(100), w3=z((100, 7)), b3=b3)
    params_path = tmp_path / "broken.json"
    save_params(broken, params_path)
    cfg = write_config(tmp_path / "cfg.json",
                       converter={"params_path": str(params_path)})
    rc = main(["--config", cfg, "convert", "--d-alpha", "0.0",
               "--d-woba", "0.0"])
    assert rc == EXIT_RUNTIME
    assert "runtime error" in capsys.readouterr().err


def test_convert_missing_batter_file(tmp_path):
    rc = main(["convert", "--batter", str(tmp_path / "nope.json"),
               "--d-alpha", "0.1", "--d-woba", "-0.005"])
    assert rc == EXIT_DATA


# ---------------------------------------------------------------- sweep

def test_sweep_strategy_grid(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", n_games=300,
                       sweep={"d_alpha_grid": [0.0, 0.1],
                              "d_woba_grid": [0.0]})
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["--config", cfg, "--out", str(a), "sweep"]) == EXIT_OK
    assert main(["--config", cfg, "--out", str(b), "sweep"]) == EXIT_OK
    lines = a.read_text().splitlines()
    assert lines[0] == SWEEP_CSV_HEADER
    assert len(lines) == 4  # header + baseline + 2 cells
    assert lines[1].startswith("baseline,")
    assert a.read_bytes() == b.read_bytes()
    assert "best" in capsys.readouterr().out


def test_sweep_threshold_mode(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", n_games=300,
                       sweep={"theta_o_grid": [1.5], "theta_l_grid": [0.3]})
    out = tmp_path / "sweep.csv"
    rc = main(["--config", cfg, "--out", str(out), "sweep",
               "--mode", "threshold-grid"])
    assert rc == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[2].startswith("threshold,")


# ---------------------------------------------------------------- validate

def test_validate_against_own_histogram(cfg_path, tmp_path, capsys):
    hist = tmp_path / "hist.csv"
    assert main(["--config", cfg_path, "--out", str(tmp_path / "s.json"),
                 "simulate", "--histogram-csv", str(hist)]) == EXIT_OK
    capsys.readouterr()
    out = tmp_path / "paired.csv"
    rc = main(["--config", cfg_path, "--out", str(out), "validate",
               "--reference", str(hist)])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "total variation distance 0.0000" in text
    assert "mean difference +0.0000" in text
    lines = out.read_text().splitlines()
    assert lines[0] == "runs,count_sim,count_ref"
    for line in lines[1:]:
        _, sim, ref = line.split(",")
        assert sim == ref


def test_validate_missing_reference(cfg_path, tmp_path):
    rc = main(["--config", cfg_path, "--out", str(tmp_path / "v.csv"),
               "validate", "--reference", str(tmp_path / "nope.csv")])
    assert rc == EXIT_DATA


def test_validate_malformed_reference(cfg_path, tmp_path, capsys):
    ref = tmp_path / "ref.csv"
    ref.write_text("runs,count\n0,ten\n")
    rc = main(["--config", cfg_path, "--out", str(tmp_path / "v.csv"),
               "validate", "--reference", str(ref)])
    assert rc == EXIT_DATA
    assert ":2:" in capsys.readouterr().err
