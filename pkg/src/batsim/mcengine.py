"""Vectorized Monte Carlo engine with worker-count-independent results.

The determinism contract: games are split into fixed-size batches
(BATCH_SIZE, never a function of worker count), batch i draws from a
dedicated generator seeded with (seed, i), and every step of a batch draws
uniforms for all of its games whether or not they have finished.  The
iteration count of a batch therefore depends only on its own games, batch
histograms are integers, and their sum is order-independent, so any degree
of parallelism produces byte-identical aggregates.

Step semantics mirror the scalar engine in simulation.py: the policy is
baked into per-(slot, state) outcome tables at compile time, transitions are
sampled from per-(state, outcome) cumulative rows, and a plate-appearance
cap per half-inning guards against never-ending innings.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .transitions import (
    INNING_OVER,
    NUM_LIVE_STATES,
    OUTCOMES,
    TransitionEntry,
    TransitionTable,
    live_states,
    simple_transition,
)

BATCH_SIZE = 4096


@dataclass(frozen=True)
class CompiledSim:
    """Lineup, policy, and table flattened to arrays for the batch loop."""

    outcome_cum: np.ndarray    # (9, 24, 8) cumulative outcome probs
    trans_cum: np.ndarray      # (192, L) cumulative entry probs, padded with 1
    trans_post: np.ndarray     # (192, L) post state codes, 24 == inning over
    trans_runs: np.ndarray     # (192, L) runs scored per entry
    fallback_flag: np.ndarray  # (192,) 1 where the table had no row
    innings: int
    pa_cap: int


def compile_simulation(lineup, policy, table: TransitionTable, *,
                       innings: int, pa_cap: int) -> CompiledSim:
    if innings <= 0 or pa_cap <= 0:
        raise ValueError("innings and pa_cap must be positive")
    states = live_states()
    choices = [policy(s) for s in states]

    outcome_cum = np.zeros((9, NUM_LIVE_STATES, 8))
    for slot in range(9):
        for s, choice in zip(states, choices):
            probs = lineup.slots[slot].vector(choice).as_tuple()
            cum = np.cumsum(probs)
            cum[-1] = 1.0  # absorb float crumbs; a unit draw cannot escape
            outcome_cum[slot, s.index] = cum

    rows = []
    for s in states:
        for outcome in OUTCOMES:
            entries = table.rows.get((s.outs, s.bases, outcome))
            fell_back = entries is None
            if fell_back:
                post, runs = simple_transition(s, outcome)
                entries = (TransitionEntry(post.outs, post.bases, runs, 1.0),)
            rows.append((entries, fell_back))

    width = max(len(entries) for entries, _ in rows)
    n_keys = NUM_LIVE_STATES * 8
    trans_cum = np.ones((n_keys, width))
    trans_post = np.zeros((n_keys, width), dtype=np.int64)
    trans_runs = np.zeros((n_keys, width), dtype=np.int64)
    fallback_flag = np.zeros(n_keys, dtype=np.int64)
    for key, (entries, fell_back) in enumerate(rows):
        cum = np.cumsum([e.prob for e in entries])
        cum[-1] = 1.0
        posts = [INNING_OVER if e.outs >= 3 else e.outs * 8 + e.bases
                 for e in entries]
        runs = [e.runs for e in entries]
        k = len(entries)
        trans_cum[key, :k] = cum
        trans_post[key, :k] = posts
        trans_runs[key, :k] = runs
        # Padding keeps cum at 1.0, so padded columns are never selected;
        # replicate the last real entry there anyway.
        trans_post[key, k:] = posts[-1]
        trans_runs[key, k:] = runs[-1]
        fallback_flag[key] = fell_back
    return CompiledSim(outcome_cum=outcome_cum, trans_cum=trans_cum,
                       trans_post=trans_post, trans_runs=trans_runs,
                       fallback_flag=fallback_flag, innings=innings,
                       pa_cap=pa_cap)


def _simulate_batch(c: CompiledSim, seed: int, batch_index: int, n: int):
    """Run one batch of n games; returns (histogram, truncated, fallbacks, pa)."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, batch_index)))
    state = np.zeros(n, dtype=np.int64)
    cursor = np.zeros(n, dtype=np.int64)
    inning = np.zeros(n, dtype=np.int64)
    pa_inning = np.zeros(n, dtype=np.int64)
    runs = np.zeros(n, dtype=np.int64)
    pa = np.zeros(n, dtype=np.int64)
    fallbacks = np.zeros(n, dtype=np.int64)
    truncated = np.zeros(n, dtype=bool)
    done = np.zeros(n, dtype=bool)

    while not done.all():
        u_outcome = rng.random(n)
        u_post = rng.random(n)
        idx = np.flatnonzero(~done)
        s = state[idx]
        slot = cursor[idx]
        o = np.sum(c.outcome_cum[slot, s] <= u_outcome[idx, None], axis=1)
        key = s * 8 + o
        j = np.sum(c.trans_cum[key] <= u_post[idx, None], axis=1)
        post = c.trans_post[key, j]

        runs[idx] += c.trans_runs[key, j]
        fallbacks[idx] += c.fallback_flag[key]
        pa[idx] += 1
        cursor[idx] = (slot + 1) % 9
        pa_now = pa_inning[idx] + 1

        over = post == INNING_OVER
        trunc = ~over & (pa_now >= c.pa_cap)
        truncated[idx] |= trunc
        ended = over | trunc
        inning_now = inning[idx] + ended
        inning[idx] = inning_now
        state[idx] = np.where(ended, 0, post)
        pa_inning[idx] = np.where(ended, 0, pa_now)
        done[idx] = inning_now >= c.innings

    return (np.bincount(runs), int(truncated.sum()),
            int(fallbacks.sum()), int(pa.sum()))


def _batch_sizes(n_games: int) -> list[int]:
    full, rest = divmod(n_games, BATCH_SIZE)
    return [BATCH_SIZE] * full + ([rest] if rest else [])


_WORKER_COMPILED: CompiledSim | None = None


def _init_worker(compiled: CompiledSim) -> None:
    global _WORKER_COMPILED
    _WORKER_COMPILED = compiled


def _worker_task(args):
    seed, batch_index, size = args
    return batch_index, _simulate_batch(_WORKER_COMPILED, seed, batch_index, size)


def _merge(results):
    """Sum per-batch results in batch order.  Everything is integer counts,
    so the sum is exact and independent of completion order anyway."""
    width = max(len(hist) for hist, _, _, _ in results)
    total = np.zeros(width, dtype=np.int64)
    truncated = fallbacks = pa = 0
    for hist, tr, fb, p in results:
        total[:len(hist)] += hist
        truncated += tr
        fallbacks += fb
        pa += p
    return total, truncated, fallbacks, pa


def run_batches(compiled: CompiledSim, *, n_games: int, seed: int, workers: int):
    sizes = _batch_sizes(n_games)
    if workers <= 1 or len(sizes) == 1:
        results = [_simulate_batch(compiled, seed, i, size)
                   for i, size in enumerate(sizes)]
        return _merge(results)

    tasks = [(seed, i, size) for i, size in enumerate(sizes)]
    by_index: dict[int, tuple] = {}
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(compiled,)) as pool:
        for batch_index, result in pool.map(_worker_task, tasks):
            by_index[batch_index] = result
    return _merge([by_index[i] for i in range(len(sizes))])
