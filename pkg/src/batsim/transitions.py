"""Base-out state transitions: event logs, empirical tables, run expectancy.

The unit of play is one plate appearance.  Before it, the game sits in one of
24 live base-out states (0-2 outs x 8 base-occupancy masks); the batter's
outcome then moves the game to a post state and scores some runs.  An inning
is over once the post state reaches 3 outs; the bases mask of an inning-ending
row records the runners stranded at that moment.

Every recorded transition must balance the books: the batter plus the runners
already aboard each end the play on base, scored, or out, so

    runners_before + 1 == runners_after + runs_scored + outs_gained

holds exactly.  The parser enforces this identity row by row, which catches
most hand-edited or corrupted logs immediately.
"""

from __future__ import annotations

import csv
import json
import math
import os
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .abilities import AbilityVector

NUM_BASES_MASKS = 8
NUM_LIVE_STATES = 24  # 3 out counts x 8 masks
INNING_OVER = 24      # collapsed index for any 3-out state

EVENT_CSV_HEADER = ("outs_pre", "bases_pre", "outcome",
                    "outs_post", "bases_post", "runs")


class Outcome(Enum):
    """Plate-appearance outcomes; values are the event-log codes."""

    SINGLE = "SINGLE"
    DOUBLE = "DOUBLE"
    TRIPLE = "TRIPLE"
    HOME_RUN = "HR"
    WALK = "BB"
    STRIKEOUT = "K"
    GROUND_OUT = "GO"
    FLY_OUT = "FO"


# Component order shared with AbilityVector.as_tuple().
OUTCOMES = (
    Outcome.SINGLE, Outcome.DOUBLE, Outcome.TRIPLE, Outcome.HOME_RUN,
    Outcome.WALK, Outcome.STRIKEOUT, Outcome.GROUND_OUT, Outcome.FLY_OUT,
)
OUTCOME_INDEX = {o: i for i, o in enumerate(OUTCOMES)}
OUTCOME_BY_CODE = {o.value: o for o in OUTCOMES}

HITS = {Outcome.SINGLE: 1, Outcome.DOUBLE: 2, Outcome.TRIPLE: 3,
        Outcome.HOME_RUN: 4}
OUTS = (Outcome.STRIKEOUT, Outcome.GROUND_OUT, Outcome.FLY_OUT)


class EventLogError(ValueError):
    pass


class MalformedRowError(EventLogError):
    pass


class UnknownOutcomeError(EventLogError):
    pass


class ConservationViolationError(EventLogError):
    """A row where batter + runners are not all accounted for, or a walk
    that records outs or multiple runs."""


class EmptyInputError(EventLogError):
    pass


class TransitionTableError(ValueError):
    pass


class NonAbsorbingError(RuntimeError):
    """Run expectancies failed to converge: the inning never (or almost
    never) ends under this batter and table."""


@dataclass(frozen=True, slots=True)
class GameState:
    """Base-out state: outs in 0..3 (3 == inning over), bases as a 3-bit
    mask with bit 0 = first base, bit 1 = second, bit 2 = third."""

    outs: int
    bases: int

    def __post_init__(self):
        if not (0 <= self.outs <= 3):
            raise ValueError(f"outs must be 0..3, got {self.outs}")
        if not (0 <= self.bases <= 7):
            raise ValueError(f"bases mask must be 0..7, got {self.bases}")

    @property
    def is_over(self) -> bool:
        return self.outs >= 3

    @property
    def runners(self) -> int:
        return (self.bases & 1) + ((self.bases >> 1) & 1) + ((self.bases >> 2) & 1)

    @property
    def index(self) -> int:
        """Flat index: live states map to 0..23, inning-over to 24."""
        return INNING_OVER if self.outs >= 3 else self.outs * 8 + self.bases


def live_states() -> list[GameState]:
    return [GameState(o, b) for o in range(3) for b in range(8)]


START_OF_INNING = GameState(0, 0)


def _runner_count(bases: int) -> int:
    return (bases & 1) + ((bases >> 1) & 1) + ((bases >> 2) & 1)


@dataclass(frozen=True, slots=True)
class TransitionEvent:
    outs_pre: int
    bases_pre: int
    outcome: Outcome
    outs_post: int
    bases_post: int
    runs: int


def check_event(outs_pre, bases_pre, outcome, outs_post, bases_post, runs) -> str | None:
    """Return a reason string if the row is invalid, else None."""
    if not (0 <= outs_pre <= 2):
        return f"outs_pre must be 0..2, got {outs_pre}"
    if not (0 <= outs_post <= 3):
        return f"outs_post must be 0..3, got {outs_post}"
    if not (0 <= bases_pre <= 7):
        return f"bases_pre must be 0..7, got {bases_pre}"
    if not (0 <= bases_post <= 7):
        return f"bases_post must be 0..7, got {bases_post}"
    if runs < 0:
        return f"runs must be non-negative, got {runs}"
    outs_gained = outs_post - outs_pre
    if outs_gained < 0:
        return f"outs decreased from {outs_pre} to {outs_post}"
    lhs = _runner_count(bases_pre) + 1
    rhs = _runner_count(bases_post) + runs + outs_gained
    if lhs != rhs:
        return (f"conservation violated: {_runner_count(bases_pre)} runners + batter"
                f" != {_runner_count(bases_post)} runners + {runs} runs"
                f" + {outs_gained} outs")
    if outcome is Outcome.WALK:
        if outs_gained != 0:
            return "a walk cannot record an out"
        if runs > 1:
            return f"a walk can force in at most one run, got {runs}"
    return None


@dataclass(frozen=True)
class EventLogParse:
    events: tuple[TransitionEvent, ...]
    rejected: tuple[tuple[int, str], ...]  # (1-based file line, reason)


def parse_event_log(source, *, strict: bool = True) -> EventLogParse:
    """Parse a transition event CSV.

    source may be a path or any iterable of text lines.  In strict mode the
    first invalid row raises; otherwise invalid rows are collected in
    .rejected with their file line numbers.  A bad header or an empty log
    always raises.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return parse_event_log(fh, strict=strict)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError("event log is empty") from None
    if tuple(h.strip() for h in header) != EVENT_CSV_HEADER:
        raise MalformedRowError(
            f"line 1: expected header {','.join(EVENT_CSV_HEADER)}, got {header!r}")

    events: list[TransitionEvent] = []
    rejected: list[tuple[int, str]] = []

    def bad(line_no, reason, exc_type=ConservationViolationError):
        if strict:
            raise exc_type(f"line {line_no}: {reason}")
        rejected.append((line_no, reason))

    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            bad(line_no, f"expected 6 fields, got {len(row)}", MalformedRowError)
            continue
        code = row[2].strip()
        outcome = OUTCOME_BY_CODE.get(code)
        if outcome is None:
            bad(line_no, f"unknown outcome code {code!r}", UnknownOutcomeError)
            continue
        try:
            outs_pre, bases_pre = int(row[0]), int(row[1])
            outs_post, bases_post = int(row[3]), int(row[4])
            runs = int(row[5])
        except ValueError:
            bad(line_no, f"non-integer field in {row!r}", MalformedRowError)
            continue
        reason = check_event(outs_pre, bases_pre, outcome, outs_post, bases_post, runs)
        if reason is not None:
            bad(line_no, reason)
            continue
        events.append(TransitionEvent(outs_pre, bases_pre, outcome,
                                      outs_post, bases_post, runs))

    if not events and not rejected:
        raise EmptyInputError("event log has a header but no rows")
    return EventLogParse(tuple(events), tuple(rejected))


def write_event_csv(events, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_CSV_HEADER)
        for e in events:
            writer.writerow((e.outs_pre, e.bases_pre, e.outcome.value,
                             e.outs_post, e.bases_post, e.runs))


def _advance_all(bases: int, n: int) -> tuple[int, int]:
    """Advance every runner n bases; return (new mask, runs scored)."""
    new, runs = 0, 0
    for b in (1, 2, 3):
        if bases & (1 << (b - 1)):
            if b + n >= 4:
                runs += 1
            else:
                new |= 1 << (b + n - 1)
    return new, runs


def _forced_walk(bases: int) -> tuple[int, int]:
    if not bases & 1:
        return bases | 1, 0
    if not bases & 2:
        return bases | 3, 0
    if not bases & 4:
        return 7, 0
    return 7, 1


def simple_transition(state: GameState, outcome: Outcome) -> tuple[GameState, int]:
    """Minimal deterministic advancement: outs freeze runners, walks force,
    an n-base hit moves every runner exactly n bases.  Used when an
    empirical table has no data for a situation."""
    if state.is_over:
        raise ValueError("no transitions from an ended inning")
    if outcome in HITS:
        n = HITS[outcome]
        new, runs = _advance_all(state.bases, n)
        if n == 4:
            runs += 1
        else:
            new |= 1 << (n - 1)
        return GameState(state.outs, new), runs
    if outcome is Outcome.WALK:
        new, runs = _forced_walk(state.bases)
        return GameState(state.outs, new), runs
    return GameState(state.outs + 1, state.bases), 0


@dataclass(frozen=True, slots=True)
class TransitionEntry:
    outs: int
    bases: int
    runs: int
    prob: float


Key = tuple[int, int, Outcome]


@dataclass(frozen=True)
class TransitionTable:
    """Conditional distributions over post states, keyed by
    (outs, bases, outcome).  Missing keys mean "no data"; sampling falls
    back to :func:`simple_transition` for those."""

    rows: dict[Key, tuple[TransitionEntry, ...]]
    min_count: int = 0

    def row(self, outs: int, bases: int, outcome: Outcome):
        return self.rows.get((outs, bases, outcome))

    @property
    def coverage(self) -> float:
        return len(self.rows) / (NUM_LIVE_STATES * len(OUTCOMES))

    @classmethod
    def simple(cls) -> "TransitionTable":
        """Point-mass table reproducing simple_transition everywhere."""
        rows = {}
        for state in live_states():
            for outcome in OUTCOMES:
                post, runs = simple_transition(state, outcome)
                rows[(state.outs, state.bases, outcome)] = (
                    TransitionEntry(post.outs, post.bases, runs, 1.0),)
        return cls(rows=rows, min_count=0)

    def to_json_obj(self) -> dict:
        obj = {}
        for (outs, bases, outcome), entries in sorted(
                self.rows.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
            key = f"{outs}-{bases}-{outcome.value}"
            obj[key] = [
                {"outs": e.outs, "bases": e.bases, "runs": e.runs, "p": e.prob}
                for e in entries
            ]
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TransitionTable":
        if not isinstance(obj, dict):
            raise TransitionTableError("transition JSON must be an object")
        rows: dict[Key, tuple[TransitionEntry, ...]] = {}
        for key, raw_entries in obj.items():
            parts = key.split("-")
            if len(parts) != 3:
                raise TransitionTableError(f"bad row key {key!r}")
            try:
                outs, bases = int(parts[0]), int(parts[1])
            except ValueError:
                raise TransitionTableError(f"bad row key {key!r}") from None
            outcome = OUTCOME_BY_CODE.get(parts[2])
            if outcome is None:
                raise TransitionTableError(f"unknown outcome in key {key!r}")
            if not (0 <= outs <= 2 and 0 <= bases <= 7):
                raise TransitionTableError(f"key {key!r} is not a live state")
            entries = []
            for raw in raw_entries:
                entry = TransitionEntry(int(raw["outs"]), int(raw["bases"]),
                                        int(raw["runs"]), float(raw["p"]))
                if entry.prob <= 0.0:
                    raise TransitionTableError(f"{key}: non-positive probability")
                reason = check_event(outs, bases, outcome,
                                     entry.outs, entry.bases, entry.runs)
                if reason is not None:
                    raise ConservationViolationError(f"{key}: {reason}")
                entries.append(entry)
            total = math.fsum(e.prob for e in entries)
            if abs(total - 1.0) > 1e-9:
                raise TransitionTableError(f"{key}: probabilities sum to {total!r}")
            rows[(outs, bases, outcome)] = tuple(entries)
        return cls(rows=rows)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TransitionTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def build_table(events, min_count: int = 5) -> TransitionTable:
    """Estimate a transition table from parsed events.

    Each (outs, bases, outcome) row is the empirical distribution of its
    observed post states.  Rows observed fewer than min_count times are
    blended half-and-half with the simple model's point mass, which keeps
    rare situations from being governed by one or two noisy observations.
    """
    counts: dict[Key, dict[tuple[int, int, int], int]] = {}
    for e in events:
        key = (e.outs_pre, e.bases_pre, e.outcome)
        dest = (e.outs_post, e.bases_post, e.runs)
        counts.setdefault(key, {})[dest] = counts.get(key, {}).get(dest, 0) + 1

    rows: dict[Key, tuple[TransitionEntry, ...]] = {}
    for key, dests in counts.items():
        n = sum(dests.values())
        probs = {dest: c / n for dest, c in dests.items()}
        if n < min_count:
            outs, bases, outcome = key
            post, runs = simple_transition(GameState(outs, bases), outcome)
            simple_dest = (post.outs, post.bases, runs)
            probs = {dest: 0.5 * p for dest, p in probs.items()}
            probs[simple_dest] = probs.get(simple_dest, 0.0) + 0.5
        entries = tuple(
            TransitionEntry(outs, bases, runs, p)
            for (outs, bases, runs), p in sorted(probs.items())
        )
        rows[key] = entries
    if not rows:
        raise EmptyInputError("no events to build a table from")
    return TransitionTable(rows=rows, min_count=min_count)


def _cumulative(entries) -> list[float]:
    cum, total = [], 0.0
    for e in entries:
        total += e.prob
        cum.append(total)
    cum[-1] = 1.0  # absorb float crumbs so a unit draw cannot escape
    return cum


def sample_transition(table: TransitionTable, state: GameState,
                      outcome: Outcome, rng) -> tuple[GameState, int, bool]:
    """Draw a post state.  Returns (state, runs, fell_back); fell_back is
    True when the table had no row and the simple model answered instead.
    Callers accumulate the fallback count themselves, keeping tables
    immutable and sampling safe to run concurrently."""
    entries = table.rows.get((state.outs, state.bases, outcome))
    if entries is None:
        post, runs = simple_transition(state, outcome)
        return post, runs, True
    if len(entries) == 1:
        e = entries[0]
    else:
        cum = _cumulative(entries)
        e = entries[bisect_right(cum, rng.random())]
    return GameState(e.outs, e.bases), e.runs, False


@dataclass(frozen=True)
class RunExpectancyTable:
    """Expected runs to the end of the inning from each live state."""

    values: tuple[float, ...]  # indexed outs * 8 + bases

    def __post_init__(self):
        if len(self.values) != NUM_LIVE_STATES:
            raise ValueError("expected 24 values")

    def value(self, state: GameState) -> float:
        if state.is_over:
            return 0.0
        return self.values[state.index]

    def as_dict(self) -> dict[str, float]:
        return {f"{s.outs}-{s.bases}": self.values[s.index] for s in live_states()}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunExpectancyTable":
        vals = [0.0] * NUM_LIVE_STATES
        for s in live_states():
            vals[s.index] = float(obj[f"{s.outs}-{s.bases}"])
        return cls(values=tuple(vals))


def _transition_terms(table: TransitionTable, batter: AbilityVector):
    """Flatten (state, outcome, entry) triples into parallel arrays:
    source index, post index (24 == inning over), runs, joint probability."""
    probs = batter.as_tuple()
    src, post, runs, p = [], [], [], []
    for state in live_states():
        for outcome, p_outcome in zip(OUTCOMES, probs):
            if p_outcome <= 0.0:
                continue
            entries = table.rows.get((state.outs, state.bases, outcome))
            if entries is None:
                s2, r = simple_transition(state, outcome)
                entries = (TransitionEntry(s2.outs, s2.bases, r, 1.0),)
            for e in entries:
                src.append(state.index)
                post.append(INNING_OVER if e.outs >= 3 else e.outs * 8 + e.bases)
                runs.append(e.runs)
                p.append(p_outcome * e.prob)
    return (np.array(src), np.array(post),
            np.array(runs, dtype=float), np.array(p, dtype=float))


def run_expectancy(table: TransitionTable, batter: AbilityVector, *,
                   tol: float = 1e-10, max_sweeps: int = 100_000,
                   ) -> RunExpectancyTable:
    """Solve for expected runs-to-end-of-inning with a fixed batter at the
    plate, by value iteration to the stated residual.

    Raises :class:`NonAbsorbingError` when the residual fails to reach tol
    within the sweep budget, which happens exactly when the inning cannot
    (or essentially cannot) reach three outs under this batter.
    """
    src, post, runs, p = _transition_terms(table, batter)

    # Immediate expected runs per state, and the live-to-live flow matrix.
    b = np.zeros(NUM_LIVE_STATES)
    np.add.at(b, src, p * runs)
    m = np.zeros((NUM_LIVE_STATES, NUM_LIVE_STATES))
    alive = post < INNING_OVER
    np.add.at(m, (src[alive], post[alive]), p[alive])

    re = np.zeros(NUM_LIVE_STATES)
    for _ in range(max_sweeps):
        new = b + m @ re
        residual = np.max(np.abs(new - re))
        re = new
        if residual < tol:
            return RunExpectancyTable(values=tuple(re.tolist()))
    raise NonAbsorbingError(
        f"run expectancy did not converge within {max_sweeps} sweeps "
        f"(last residual {residual:.3g})")
