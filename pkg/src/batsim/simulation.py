"""Game simulation: a readable scalar engine plus aggregate run statistics.

simulate_game walks one offense through nine half-innings, one plate
appearance at a time, consulting the strategy policy before every batter.
It is the reference implementation: monte_carlo (in mcengine) must agree
with it statistically, and the tests check that it does.

A hard cap bounds plate appearances per half-inning so degenerate batter
profiles (nothing but home runs) cannot loop forever; hitting the cap ends
the inning and marks the game truncated.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .abilities import AbilityVector, NoOutProbabilityError, validate
from .strategies import StrategyTriple
from .transitions import (
    OUTCOMES,
    START_OF_INNING,
    TransitionTable,
    sample_transition,
)
from . import mcengine

PA_CAP_PER_HALF_INNING = 100
DEFAULT_INNINGS = 9


@dataclass(frozen=True)
class Lineup:
    """Nine batting slots, each a strategy triple, in batting order."""

    slots: tuple[StrategyTriple, ...]

    def __post_init__(self):
        if len(self.slots) != 9:
            raise ValueError(f"a lineup has 9 slots, got {len(self.slots)}")
        for i, triple in enumerate(self.slots):
            if not isinstance(triple, StrategyTriple):
                raise TypeError(f"slot {i} is not a StrategyTriple")
            for vec in (triple.normal, triple.on_base, triple.long_hit):
                try:
                    validate(vec)
                except NoOutProbabilityError:
                    pass  # legal here: the per-inning PA cap guarantees termination

    @classmethod
    def from_vectors(cls, vectors) -> "Lineup":
        """A lineup that ignores strategy calls (each slot's three profiles
        are the same measured vector)."""
        return cls(slots=tuple(StrategyTriple.constant(v) for v in vectors))

    @property
    def normals(self) -> tuple[AbilityVector, ...]:
        return tuple(t.normal for t in self.slots)


@dataclass(frozen=True)
class HalfInningResult:
    runs: int
    next_cursor: int
    plate_appearances: int
    fallback_transitions: int
    truncated: bool


@dataclass(frozen=True)
class GameResult:
    runs: int
    inning_runs: tuple[int, ...]
    plate_appearances: int
    fallback_transitions: int
    truncated: bool


def _draw_outcome_index(probs, rng) -> int:
    u = rng.random()
    total = 0.0
    last_positive = 0
    for i, p in enumerate(probs):
        if p <= 0.0:
            continue
        total += p
        last_positive = i
        if u < total:
            return i
    return last_positive  # float crumbs left u at/above the accumulated sum


def play_half_inning(lineup: Lineup, cursor: int, policy, table: TransitionTable,
                     rng, *, pa_cap: int = PA_CAP_PER_HALF_INNING) -> HalfInningResult:
    """Play one half-inning starting from the given batting-order cursor.

    policy maps a GameState to a StrategyChoice; rng needs a .random()
    method.  Returns the runs scored and the cursor for the next inning.
    """
    state = START_OF_INNING
    runs = 0
    pa = 0
    fallbacks = 0
    truncated = False
    while True:
        triple = lineup.slots[cursor]
        vector = triple.vector(policy(state))
        outcome = OUTCOMES[_draw_outcome_index(vector.as_tuple(), rng)]
        post, scored, fell_back = sample_transition(table, state, outcome, rng)
        runs += scored
        pa += 1
        fallbacks += fell_back
        cursor = (cursor + 1) % 9
        if post.is_over:
            break
        if pa >= pa_cap:
            truncated = True
            break
        state = post
    return HalfInningResult(runs=runs, next_cursor=cursor, plate_appearances=pa,
                            fallback_transitions=fallbacks, truncated=truncated)


def simulate_game(lineup: Lineup, policy, table: TransitionTable, rng, *,
                  innings: int = DEFAULT_INNINGS,
                  pa_cap: int = PA_CAP_PER_HALF_INNING) -> GameResult:
    """One team's offensive half of a game: nine half-innings by default."""
    cursor = 0
    inning_runs = []
    pa = 0
    fallbacks = 0
    truncated = False
    for _ in range(innings):
        half = play_half_inning(lineup, cursor, policy, table, rng, pa_cap=pa_cap)
        inning_runs.append(half.runs)
        cursor = half.next_cursor
        pa += half.plate_appearances
        fallbacks += half.fallback_transitions
        truncated = truncated or half.truncated
    return GameResult(runs=sum(inning_runs), inning_runs=tuple(inning_runs),
                      plate_appearances=pa, fallback_transitions=fallbacks,
                      truncated=truncated)


@dataclass(frozen=True)
class RunStats:
    """Aggregate scoring distribution over simulated games.

    mean and stderr are always recomputed from the histogram, so the
    histogram is the single source of truth and reruns that produce the
    same histogram report byte-identical statistics.
    """

    n_games: int
    mean: float
    stderr: float
    histogram: tuple[int, ...]
    stderr_defined: bool
    truncated_games: int = 0
    fallback_transitions: int = 0
    plate_appearances: int = 0

    @classmethod
    def from_histogram(cls, histogram, *, truncated_games: int = 0,
                       fallback_transitions: int = 0,
                       plate_appearances: int = 0) -> "RunStats":
        hist = tuple(int(c) for c in histogram)
        if any(c < 0 for c in hist):
            raise ValueError("histogram counts must be non-negative")
        n = sum(hist)
        if n == 0:
            raise ValueError("empty histogram")
        total = sum(r * c for r, c in enumerate(hist))
        total_sq = sum(r * r * c for r, c in enumerate(hist))
        mean = total / n
        if n >= 2:
            var = (total_sq - n * mean * mean) / (n - 1)
            stderr = math.sqrt(max(var, 0.0) / n)
            defined = True
        else:
            stderr = 0.0
            defined = False
        return cls(n_games=n, mean=mean, stderr=stderr, histogram=hist,
                   stderr_defined=defined, truncated_games=truncated_games,
                   fallback_transitions=fallback_transitions,
                   plate_appearances=plate_appearances)

    def to_json_dict(self) -> dict:
        return {
            "n_games": self.n_games,
            "mean": self.mean,
            "stderr": self.stderr,
            "stderr_defined": self.stderr_defined,
            "histogram": list(self.histogram),
            "truncated_games": self.truncated_games,
            "fallback_transitions": self.fallback_transitions,
            "plate_appearances": self.plate_appearances,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RunStats":
        stats = cls.from_histogram(
            obj["histogram"],
            truncated_games=int(obj.get("truncated_games", 0)),
            fallback_transitions=int(obj.get("fallback_transitions", 0)),
            plate_appearances=int(obj.get("plate_appearances", 0)),
        )
        if stats.n_games != int(obj["n_games"]):
            raise ValueError("histogram does not match the recorded n_games")
        return stats

    def save(self, json_path, csv_path=None) -> None:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")
        if csv_path is not None:
            with open(csv_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("runs", "count"))
                for r, c in enumerate(self.histogram):
                    writer.writerow((r, c))

    @classmethod
    def load(cls, json_path) -> "RunStats":
        with open(json_path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def load_histogram_csv(path) -> tuple[int, ...]:
    """Read a runs,count reference histogram."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ("runs", "count"):
            raise ValueError(f"{path}: expected header runs,count")
        counts: dict[int, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                runs, count = int(row[0]), int(row[1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if runs < 0 or count < 0:
                raise ValueError(f"{path}:{lineno}: negative runs or count")
            counts[runs] = counts.get(runs, 0) + count
    if not counts:
        raise ValueError(f"{path}: no rows")
    hist = [0] * (max(counts) + 1)
    for r, c in counts.items():
        hist[r] = c
    return tuple(hist)


def monte_carlo(lineup: Lineup, policy, table: TransitionTable, n_games: int,
                seed: int, *, workers: int = 1, innings: int = DEFAULT_INNINGS,
                pa_cap: int = PA_CAP_PER_HALF_INNING) -> RunStats:
    """Simulate n_games and aggregate their scoring distribution.

    Results are a pure function of (lineup, policy, table, n_games, seed):
    games are partitioned into fixed-size batches, each batch draws from its
    own child stream seeded by (seed, batch index), and batch histograms are
    merged by integer addition.  Worker count affects wall time only.
    """
    if n_games <= 0:
        raise ValueError("n_games must be positive")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    compiled = mcengine.compile_simulation(lineup, policy, table,
                                           innings=innings, pa_cap=pa_cap)
    hist, truncated, fallbacks, pa = mcengine.run_batches(
        compiled, n_games=n_games, seed=seed, workers=workers)
    return RunStats.from_histogram(hist, truncated_games=truncated,
                                   fallback_transitions=fallbacks,
                                   plate_appearances=pa)
