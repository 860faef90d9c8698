"""Bundled default assets: the nine-slot lineup, the synthetic empirical
transition table, and trained converter parameters.

Everything under ``batsim/data`` is reproducible from seeds; see
``scripts/build_default_assets.py`` for the generation recipe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .abilities import (
    LEAGUE_AVERAGE,
    AbilityVector,
    SlashTargets,
    fit_ability_vector,
    fit_residuals,
)
from .conversion import ConverterParams, load_params
from .transitions import TransitionTable

TARGETS_ASSET = "lineup_targets.json"
FITTED_ASSET = "lineup_fitted.json"
TABLE_ASSET = "transitions_default.json"
CONVERTER_ASSET = "converter_default.json"

# generation knobs for the bundled transition table
DEFAULT_TABLE_EVENTS = 150_000
DEFAULT_TABLE_SEED = 97
DEFAULT_TABLE_MIN_COUNT = 5

_STAT_KEYS = ("obp", "slg", "woba", "onbase_share")


def _data_root():
    return resources.files("batsim") / "data"


def bundled_lineup_targets() -> list[SlashTargets]:
    obj = json.loads((_data_root() / TARGETS_ASSET).read_text(encoding="utf-8"))
    return [SlashTargets(**{k: row[k] for k in _STAT_KEYS})
            for row in obj["targets"]]


@dataclass(frozen=True)
class LineupFit:
    """Fitted lineup vectors plus the per-slot fit residuals (absolute
    differences on each targeted stat)."""

    vectors: tuple[AbilityVector, ...]
    residuals: tuple[dict, ...]
    refitted: bool  # False when served straight from the bundled cache


def _targets_json(targets: list[SlashTargets]) -> list[dict]:
    return [{k: getattr(t, k) for k in _STAT_KEYS} for t in targets]


def _fit_all(targets: list[SlashTargets]) -> LineupFit:
    vectors = []
    residuals = []
    for t in targets:
        v = fit_ability_vector(t, LEAGUE_AVERAGE)
        vectors.append(v)
        residuals.append(fit_residuals(v, t))
    return LineupFit(tuple(vectors), tuple(residuals), refitted=True)


def fitted_lineup(targets: list[SlashTargets] | None = None) -> LineupFit:
    """The default lineup's fitted ability vectors.

    Served from the bundled cache when it matches the requested targets;
    refitted (and re-cached when the data directory is writable) otherwise.
    """
    if targets is None:
        targets = bundled_lineup_targets()
    cache_path = _data_root() / FITTED_ASSET
    wanted = _targets_json(targets)
    try:
        obj = json.loads(cache_path.read_text(encoding="utf-8"))
    except (FileNotFoundError, json.JSONDecodeError):
        obj = None
    if obj is not None and obj.get("targets") == wanted:
        vectors = tuple(AbilityVector.from_json_dict(d) for d in obj["vectors"])
        return LineupFit(vectors, tuple(obj["residuals"]), refitted=False)

    fit = _fit_all(targets)
    # the cache file belongs to the bundled lineup; custom targets stay in memory
    if wanted == _targets_json(bundled_lineup_targets()):
        payload = {
            "targets": wanted,
            "vectors": [v.to_json_dict() for v in fit.vectors],
            "residuals": list(fit.residuals),
        }
        try:
            with open(str(cache_path), "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=1)
                fh.write("\n")
        except OSError:
            pass  # read-only install: serve the in-memory fit
    return fit


def default_transition_table() -> TransitionTable:
    return TransitionTable.load(str(_data_root() / TABLE_ASSET))


def default_converter_params() -> ConverterParams:
    return load_params(str(_data_root() / CONVERTER_ASSET))
