"""Situational batting strategies and per-batter strategy triples.

A strategy is a per-state choice among three versions of the same batter:
the measured profile, an on-base-tilted variant, and a long-hit-tilted
variant.  This module supplies the choice policies (a fixed base-out rule
and a run-expectancy threshold rule) and the construction of the per-batter
triples via the trained conversion model.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .abilities import (
    DEFAULT_RUN_VALUES,
    AbilityVector,
    RunValues,
    onbase_share,
    validate,
)
from .transitions import GameState, RunExpectancyTable


class StrategyChoice(Enum):
    NORMAL = "normal"
    ON_BASE = "on_base"
    LONG_HIT = "long_hit"


class InvalidThresholdsError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyTriple:
    """One batter's three selectable profiles.

    ordering_ok records whether the converted variants kept the intended
    on-base-share ordering (long_hit <= normal <= on_base, with slack);
    a False value flags the batter for reporting but never blocks play.
    """

    normal: AbilityVector
    on_base: AbilityVector
    long_hit: AbilityVector
    ordering_ok: bool = True

    def vector(self, choice: StrategyChoice) -> AbilityVector:
        if choice is StrategyChoice.ON_BASE:
            return self.on_base
        if choice is StrategyChoice.LONG_HIT:
            return self.long_hit
        return self.normal

    @classmethod
    def constant(cls, vector: AbilityVector) -> "StrategyTriple":
        """A batter who ignores the strategy call (all three identical)."""
        return cls(normal=vector, on_base=vector, long_hit=vector)


def always_normal(state: GameState) -> StrategyChoice:
    """Baseline policy: no situational adjustment."""
    return StrategyChoice.NORMAL


def fixed_policy(state: GameState) -> StrategyChoice:
    """Fixed base-out rule.

    Go for on-base with nobody out or with a runner in scoring position;
    go for the long hit with two outs and nobody past first; otherwise
    swing normally.
    """
    scoring_position = bool(state.bases & 0b110)
    if state.outs == 0 or scoring_position:
        return StrategyChoice.ON_BASE
    if state.outs == 2:
        return StrategyChoice.LONG_HIT
    return StrategyChoice.NORMAL


@dataclass(frozen=True)
class ThresholdPolicyConfig:
    """Run-expectancy cutoffs: on-base at or above theta_o, long-hit at or
    below theta_l.  theta_l must sit strictly below theta_o so the two
    regions cannot overlap."""

    theta_o: float
    theta_l: float

    def __post_init__(self):
        if not self.theta_l < self.theta_o:
            raise InvalidThresholdsError(
                f"theta_l ({self.theta_l}) must be below theta_o ({self.theta_o})")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Callable policy choosing by the current state's run expectancy."""

    config: ThresholdPolicyConfig
    expectancy: RunExpectancyTable

    def __call__(self, state: GameState) -> StrategyChoice:
        value = self.expectancy.value(state)
        if value >= self.config.theta_o:
            return StrategyChoice.ON_BASE
        if value <= self.config.theta_l:
            return StrategyChoice.LONG_HIT
        return StrategyChoice.NORMAL


def threshold_policy(config: ThresholdPolicyConfig,
                     expectancy: RunExpectancyTable) -> ThresholdPolicy:
    return ThresholdPolicy(config=config, expectancy=expectancy)


def build_triple(normal: AbilityVector, params, d_alpha: float, d_woba: float,
                 *, run_values: RunValues = DEFAULT_RUN_VALUES,
                 ordering_slack: float = 0.02) -> StrategyTriple:
    """Convert one batter into a strategy triple.

    The on-base variant shifts the batter's on-base value share up by
    d_alpha, the long-hit variant down by the same amount; both pay the same
    non-positive overall-quality price d_woba.  With d_alpha zero the two
    variants coincide: the profile merely discounted by d_woba.
    """
    from .conversion import convert  # local import: conversion is heavy

    if d_alpha < 0.0:
        raise ValueError(f"d_alpha must be non-negative, got {d_alpha}")
    if d_woba > 0.0:
        raise ValueError(f"d_woba must be non-positive, got {d_woba}")
    validate(normal)
    on_base = convert(params, normal, d_alpha, d_woba)
    long_hit = convert(params, normal, -d_alpha, d_woba)
    slack = ordering_slack
    share_n = onbase_share(normal, run_values)
    ordering_ok = (
        onbase_share(long_hit, run_values) <= share_n + slack
        and share_n <= onbase_share(on_base, run_values) + slack
    )
    return StrategyTriple(normal=normal, on_base=on_base, long_hit=long_hit,
                          ordering_ok=ordering_ok)
