"""Synthetic transition-event generation.

Real play-by-play feeds are licensed, so the bundled pipeline estimates its
transition table from events produced here instead.  The advancement model is
deliberately richer than the deterministic fallback: runners take extra bases,
get thrown out stretching, ground into double plays, and score on sacrifice
flies, all at plausible league-ish rates.  Every branch is constructed so the
runner-accounting identity holds exactly (each runner ends the play on base,
scored, or out), which the tests hammer with large random samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abilities import LEAGUE_AVERAGE, AbilityVector, validate
from .transitions import (
    OUTCOMES,
    GameState,
    Outcome,
    TransitionEvent,
    _forced_walk,
)


@dataclass(frozen=True)
class AdvancementModel:
    """Branch rates for runner advancement.  All values are probabilities;
    mutually exclusive branches of one decision must sum below 1, the
    remainder being the conservative default (station-to-station)."""

    # Singles: batter to first; the runner from second may score, be thrown
    # out at home, or stop at third; the runner from first may reach third,
    # be cut down advancing, or stop at second.
    single_second_scores: float = 0.62
    single_second_thrown_out: float = 0.02
    single_first_to_third: float = 0.28
    single_first_thrown_out: float = 0.01

    # Doubles: batter to second; the runner from first may score, be thrown
    # out at home, or stop at third.
    double_first_scores: float = 0.44
    double_first_thrown_out: float = 0.02

    # Ground balls: occasional batter-reaches-on-error; with a runner on
    # first and fewer than two outs, a double play or a force at second;
    # otherwise the batter is retired and runners may move up one.
    ground_reach_error: float = 0.045
    ground_double_play: float = 0.36
    ground_force_at_second: float = 0.12
    ground_runners_advance: float = 0.30

    # Fly balls: occasional drop; with fewer than two outs the runner from
    # third tags and scores, and the runner from second sometimes moves up.
    fly_reach_error: float = 0.03
    fly_third_tags: float = 0.74
    fly_second_tags: float = 0.12

    def __post_init__(self):
        groups = (
            (self.single_second_scores, self.single_second_thrown_out),
            (self.single_first_to_third, self.single_first_thrown_out),
            (self.double_first_scores, self.double_first_thrown_out),
            (self.ground_double_play, self.ground_force_at_second),
        )
        singles = (self.ground_reach_error, self.ground_runners_advance,
                   self.fly_reach_error, self.fly_third_tags, self.fly_second_tags)
        for group in groups:
            if any(p < 0.0 for p in group) or sum(group) > 1.0:
                raise ValueError(f"branch group {group} must sum within [0, 1]")
        if any(not 0.0 <= p <= 1.0 for p in singles):
            raise ValueError("advancement rates must lie in [0, 1]")


DEFAULT_ADVANCEMENT = AdvancementModel()


def _hit_transition(state: GameState, n: int, rng,
                    m: AdvancementModel) -> tuple[GameState, int]:
    """Advancement on an n-base hit.  Lead runners resolve first; once a
    thrown-out runner makes the third out the play is dead, and any
    unresolved trailing runner takes the forced base just vacated ahead of
    it, so nobody is ever lost from the accounting or doubled up on a base."""
    outs = state.outs
    runs = 0
    on1 = bool(state.bases & 1)
    on2 = bool(state.bases & 2)
    on3 = bool(state.bases & 4)
    new = 0

    if n >= 3:  # triple or homer clears the bases
        runs += on1 + on2 + on3
        if n == 4:
            runs += 1
        else:
            new |= 4
        return GameState(outs, new), runs

    if n == 2:
        runs += on3 + on2
        if on1:
            u = rng.random()
            if u < m.double_first_scores:
                runs += 1
            elif u < m.double_first_scores + m.double_first_thrown_out:
                outs += 1
            else:
                new |= 4
        new |= 2
        return GameState(outs, new), runs

    # Single: the batter claims first, so the runner from first must leave it.
    if on3:
        runs += 1
    if on2:
        u = rng.random()
        if u < m.single_second_scores:
            runs += 1
        elif u < m.single_second_scores + m.single_second_thrown_out:
            outs += 1
        else:
            new |= 4
    if on1:
        if outs >= 3:
            new |= 2  # play already dead; second is free, the forced spot
        else:
            u = rng.random()
            if u < m.single_first_to_third:
                new |= 4 if not new & 4 else 2  # third blocked: stop at second
            elif u < m.single_first_to_third + m.single_first_thrown_out:
                outs += 1
            else:
                new |= 2
    new |= 1
    return GameState(outs, new), runs


def _ground_transition(state: GameState, rng,
                       m: AdvancementModel) -> tuple[GameState, int]:
    outs = state.outs
    bases = state.bases
    on1 = bool(bases & 1)
    u = rng.random()

    if u < m.ground_reach_error:
        new, runs = 0, 0
        for bit, nxt in ((4, None), (2, 4), (1, 2)):
            if bases & bit:
                if nxt is None:
                    runs += 1
                else:
                    new |= nxt
        return GameState(outs, new | 1), runs

    if on1 and outs <= 1:
        v = rng.random()
        if v < m.ground_double_play:
            # Batter and the runner from first are both retired.
            new, runs = 0, 0
            if outs == 0:
                if bases & 4:
                    runs += 1
                if bases & 2:
                    new |= 4
            else:  # second out plus one ends the inning; nobody else moves
                new = bases & ~1
            return GameState(min(outs + 2, 3), new), runs
        if v < m.ground_double_play + m.ground_force_at_second:
            # Force at second, batter safe at first, everyone else holds.
            return GameState(outs + 1, bases), 0

    # Batter out at first.
    if outs <= 1 and rng.random() < m.ground_runners_advance:
        new, runs = 0, 0
        if bases & 4:
            runs += 1
        if bases & 2:
            new |= 4
        if bases & 1:
            new |= 2
        return GameState(outs + 1, new), runs
    return GameState(outs + 1, bases), 0


def _fly_transition(state: GameState, rng,
                    m: AdvancementModel) -> tuple[GameState, int]:
    outs = state.outs
    bases = state.bases
    u = rng.random()

    if u < m.fly_reach_error:
        new, runs = 0, 0
        if bases & 4:
            runs += 1
        if bases & 2:
            new |= 4
        if bases & 1:
            new |= 2
        return GameState(outs, new | 1), runs

    if outs >= 2:
        return GameState(3, bases), 0

    new, runs = bases, 0
    if bases & 4 and rng.random() < m.fly_third_tags:
        new &= ~4
        runs += 1
    if bases & 2 and not (new & 4) and rng.random() < m.fly_second_tags:
        new = (new & ~2) | 4
    return GameState(outs + 1, new), runs


def stochastic_transition(state: GameState, outcome: Outcome, rng,
                          model: AdvancementModel = DEFAULT_ADVANCEMENT,
                          ) -> tuple[GameState, int]:
    """One plate appearance under the synthetic advancement model.

    rng needs only a .random() method returning uniforms in [0, 1)."""
    if state.is_over:
        raise ValueError("no transitions from an ended inning")
    if outcome is Outcome.WALK:
        new, runs = _forced_walk(state.bases)
        return GameState(state.outs, new), runs
    if outcome is Outcome.STRIKEOUT:
        return GameState(state.outs + 1, state.bases), 0
    if outcome is Outcome.GROUND_OUT:
        return _ground_transition(state, rng, model)
    if outcome is Outcome.FLY_OUT:
        return _fly_transition(state, rng, model)
    n = {Outcome.SINGLE: 1, Outcome.DOUBLE: 2, Outcome.TRIPLE: 3,
         Outcome.HOME_RUN: 4}[outcome]
    return _hit_transition(state, n, rng, model)


def synthesize_event_log(n_events: int, seed: int,
                         batter: AbilityVector = LEAGUE_AVERAGE,
                         model: AdvancementModel = DEFAULT_ADVANCEMENT,
                         ) -> list[TransitionEvent]:
    """Simulate half-innings with one batter profile at the plate and record
    every plate appearance as a transition event.  Deterministic in seed."""
    if n_events <= 0:
        raise ValueError("n_events must be positive")
    validate(batter)
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x5EED)))
    probs = np.asarray(batter.as_tuple())
    cum = np.cumsum(probs)
    cum[-1] = 1.0

    events: list[TransitionEvent] = []
    state = GameState(0, 0)
    while len(events) < n_events:
        outcome = OUTCOMES[int(np.searchsorted(cum, rng.random(), side="right"))]
        post, runs = stochastic_transition(state, outcome, rng, model)
        events.append(TransitionEvent(state.outs, state.bases, outcome,
                                      post.outs, post.bases, runs))
        state = GameState(0, 0) if post.is_over else post
    return events
