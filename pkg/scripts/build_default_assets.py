#!/usr/bin/env python3
"""Regenerate the bundled data assets under src/batsim/data.

Everything is seed-deterministic, so rerunning this script reproduces the
shipped files byte for byte:

  lineup_fitted.json        ability vectors fitted to the slash targets
  transitions_default.json  transition table from a synthetic event log
  converter_default.json    strategy conversion model trained on the
                            502-player synthetic pool
"""

import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from batsim.conversion import (  # noqa: E402
    LossWeights,
    TrainConfig,
    build_pair_dataset,
    save_params,
    synthesize_players,
    train,
)
from batsim.defaults import (  # noqa: E402
    CONVERTER_ASSET,
    DEFAULT_TABLE_EVENTS,
    DEFAULT_TABLE_MIN_COUNT,
    DEFAULT_TABLE_SEED,
    TABLE_ASSET,
    bundled_lineup_targets,
    fitted_lineup,
)
from batsim.synthdata import synthesize_event_log  # noqa: E402
from batsim.transitions import build_table  # noqa: E402

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "batsim" / "data"

TRAIN_SEED = 0
N_PLAYERS = 502


def main() -> None:
    t0 = time.time()
    targets = bundled_lineup_targets()
    (DATA_DIR / "lineup_fitted.json").unlink(missing_ok=True)
    fit = fitted_lineup(targets)
    worst = max(max(abs(r) for r in res.values()) for res in fit.residuals)
    print(f"lineup: fitted {len(fit.vectors)} slots, worst residual {worst:.4f} "
          f"({time.time() - t0:.1f}s)")

    t0 = time.time()
    events = synthesize_event_log(DEFAULT_TABLE_EVENTS, seed=DEFAULT_TABLE_SEED)
    table = build_table(events, min_count=DEFAULT_TABLE_MIN_COUNT)
    table.save(DATA_DIR / TABLE_ASSET)
    print(f"transitions: {len(table.rows)} rows, coverage {table.coverage:.3f} "
          f"({time.time() - t0:.1f}s)")

    t0 = time.time()
    players = synthesize_players(N_PLAYERS, seed=TRAIN_SEED)
    pairs = build_pair_dataset(players)
    params, metrics = train(pairs, TrainConfig(), seed=TRAIN_SEED)
    save_params(params, DATA_DIR / CONVERTER_ASSET,
                loss_weights=LossWeights(), train_seed=TRAIN_SEED)
    print(f"converter: {len(pairs)} pairs, val MSE(vector) {metrics.mse_vector:.2e}, "
          f"val MSE(wOBA) {metrics.mse_woba:.2e}, "
          f"negative mass after projection {metrics.neg_mass_projected:.1e} "
          f"({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    main()
