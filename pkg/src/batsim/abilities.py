"""Per-plate-appearance ability vectors and the rate stats derived from them.

A batter is modeled by a probability vector over eight mutually exclusive
plate-appearance outcomes: single, double, triple, home run, walk, strikeout,
ground out, fly out.  Everything downstream (game simulation, strategy
conversion, lineup fitting) consumes these vectors, so the invariants are
enforced here once: components non-negative, components sum to one, and
at least some probability mass on an out so innings can end.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, fields

OUTCOME_KEYS = ("1b", "2b", "3b", "hr", "bb", "k", "g", "f")

# Strict tolerance for programmatic construction; the looser one applies only
# when reading external files, where we rescale and warn instead of failing.
SUM_TOLERANCE = 1e-9
PARSE_SUM_TOLERANCE = 1e-6


class AbilityVectorError(ValueError):
    """Base for ability-vector validation and fitting failures."""


class NegativeComponentError(AbilityVectorError):
    pass


class SumNotOneError(AbilityVectorError):
    pass


class NoOutProbabilityError(AbilityVectorError):
    """All out probabilities are zero: innings would never terminate."""


class ZeroDenominatorError(AbilityVectorError):
    """A rate stat's denominator vanished (e.g. walk probability is 1)."""


class AllWalksError(ZeroDenominatorError):
    pass


class InfeasibleTargetsError(AbilityVectorError):
    """No valid ability vector meets the requested rate-stat targets."""


@dataclass(frozen=True)
class AbilityVector:
    """Outcome probabilities for one batter, in a fixed component order.

    Construction performs no validation so that deliberately degenerate
    vectors (all strikeouts, all home runs) can be built for analysis;
    call :func:`validate` before feeding a vector to anything that assumes
    the invariants hold.
    """

    p_1b: float
    p_2b: float
    p_3b: float
    p_hr: float
    p_bb: float
    p_k: float
    p_g: float
    p_f: float

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.p_1b, self.p_2b, self.p_3b, self.p_hr,
            self.p_bb, self.p_k, self.p_g, self.p_f,
        )

    @property
    def positives(self) -> tuple[float, ...]:
        """The five on-base components (1b, 2b, 3b, hr, bb)."""
        return (self.p_1b, self.p_2b, self.p_3b, self.p_hr, self.p_bb)

    @property
    def out_mass(self) -> float:
        return self.p_k + self.p_g + self.p_f

    @classmethod
    def from_iterable(cls, values) -> "AbilityVector":
        vals = tuple(float(v) for v in values)
        if len(vals) != 8:
            raise AbilityVectorError(f"expected 8 components, got {len(vals)}")
        return cls(*vals)

    def to_json_dict(self) -> dict[str, float]:
        return dict(zip(OUTCOME_KEYS, self.as_tuple()))

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AbilityVector":
        missing = [k for k in OUTCOME_KEYS if k not in obj]
        if missing:
            raise AbilityVectorError(f"missing outcome keys: {missing}")
        extra = [k for k in obj if k not in OUTCOME_KEYS]
        if extra:
            raise AbilityVectorError(f"unknown outcome keys: {extra}")
        vec = cls(*(float(obj[k]) for k in OUTCOME_KEYS))
        total = math.fsum(vec.as_tuple())
        if abs(total - 1.0) > SUM_TOLERANCE:
            if abs(total - 1.0) > PARSE_SUM_TOLERANCE or total <= 0.0:
                raise SumNotOneError(f"components sum to {total!r}")
            warnings.warn(
                f"ability vector sums to {total!r}; rescaling to 1",
                stacklevel=2,
            )
            vec = cls(*(v / total for v in vec.as_tuple()))
        return validate(vec)


def validate(vector) -> AbilityVector:
    """Check invariants, returning the (possibly coerced) vector.

    Accepts an :class:`AbilityVector` or any iterable of eight floats.
    Raises :class:`NegativeComponentError`, :class:`SumNotOneError`, or
    :class:`NoOutProbabilityError`.
    """
    if not isinstance(vector, AbilityVector):
        vector = AbilityVector.from_iterable(vector)
    for key, value in zip(OUTCOME_KEYS, vector.as_tuple()):
        if not math.isfinite(value):
            raise AbilityVectorError(f"component {key} is not finite: {value!r}")
        if value < 0.0:
            raise NegativeComponentError(f"component {key} is negative: {value!r}")
    total = math.fsum(vector.as_tuple())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumNotOneError(f"components sum to {total!r}, not 1")
    if vector.out_mass <= 0.0:
        raise NoOutProbabilityError("no probability mass on k, g, or f")
    return vector


@dataclass(frozen=True)
class RunValues:
    """Relative run values of the on-base outcomes.

    Normalized so that a walk's value is the baseline for the share metric's
    numerator; the extra-base increments are the marginal value over a single.
    """

    single: float = 0.437
    walk: float = 0.294
    extra_double: float = 0.786
    extra_triple: float = 1.117
    extra_homer: float = 1.408

    def __post_init__(self):
        vals = (self.single, self.walk, self.extra_double,
                self.extra_triple, self.extra_homer)
        if any(not math.isfinite(v) or v <= 0.0 for v in vals):
            raise ValueError(f"run values must be positive and finite: {vals}")
        if not (self.extra_double < self.extra_triple < self.extra_homer):
            raise ValueError("extra-base increments must increase with bases")


@dataclass(frozen=True)
class WobaWeights:
    """Linear weights for the wOBA-style aggregate rate stat.

    Defaults are a widely used published set; any season-specific set can be
    substituted as long as the ordering bb < 1b < 2b < 3b < hr holds.
    """

    walk: float = 0.692
    single: float = 0.865
    double: float = 1.334
    triple: float = 1.725
    homer: float = 2.065

    def __post_init__(self):
        vals = (self.walk, self.single, self.double, self.triple, self.homer)
        if any(not math.isfinite(v) or v <= 0.0 for v in vals):
            raise ValueError(f"woba weights must be positive and finite: {vals}")
        if not (self.walk < self.single < self.double < self.triple < self.homer):
            raise ValueError("woba weights must increase with outcome value")

    def as_component_array(self):
        """Weights aligned with the (1b, 2b, 3b, hr, bb) component order."""
        return (self.single, self.double, self.triple, self.homer, self.walk)


@dataclass(frozen=True)
class SlashTargets:
    """Target rate line for fitting a vector: OBP, SLG, wOBA, on-base share."""

    obp: float
    slg: float
    woba: float
    onbase_share: float

    def __post_init__(self):
        for name in ("obp", "woba", "onbase_share"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not (0.0 <= self.slg <= 4.0):
            raise ValueError(f"slg must lie in [0, 4], got {self.slg!r}")


DEFAULT_RUN_VALUES = RunValues()
DEFAULT_WOBA_WEIGHTS = WobaWeights()


def onbase_share(vector: AbilityVector,
                 run_values: RunValues = DEFAULT_RUN_VALUES) -> float:
    """Fraction of a batter's expected run production owed to singles and walks.

    Values near 1 mark a batter whose value is almost entirely reaching base;
    values near 0 mark one whose value is almost entirely extra-base power.
    Raises :class:`ZeroDenominatorError` when no on-base outcome has mass.
    """
    rv = run_values
    num = rv.single * vector.p_1b + rv.walk * vector.p_bb
    den = num + (rv.extra_double * vector.p_2b
                 + rv.extra_triple * vector.p_3b
                 + rv.extra_homer * vector.p_hr)
    if den <= 0.0:
        raise ZeroDenominatorError("vector has no on-base probability mass")
    return num / den


def woba(vector: AbilityVector,
         weights: WobaWeights = DEFAULT_WOBA_WEIGHTS) -> float:
    """Weighted on-base average of the vector under the given linear weights."""
    return (weights.single * vector.p_1b
            + weights.double * vector.p_2b
            + weights.triple * vector.p_3b
            + weights.homer * vector.p_hr
            + weights.walk * vector.p_bb)


def slash_stats(vector: AbilityVector) -> tuple[float, float]:
    """Return (OBP, SLG) for the vector.

    OBP is the total on-base probability.  SLG is total bases per at-bat,
    where at-bats exclude walks; a vector that walks every time has no
    at-bats and raises :class:`AllWalksError`.
    """
    obp = math.fsum(vector.positives)
    ab = 1.0 - vector.p_bb
    if ab <= 0.0:
        raise AllWalksError("walk probability is 1; slugging is undefined")
    total_bases = (vector.p_1b + 2.0 * vector.p_2b
                   + 3.0 * vector.p_3b + 4.0 * vector.p_hr)
    return obp, total_bases / ab


def _stat_residuals(x, targets, rv, w):
    """Residuals (fit minus target) for the four stats, from the five
    positive components x = (p_1b, p_2b, p_3b, p_hr, p_bb)."""
    p1, p2, p3, ph, pb = x
    obp = p1 + p2 + p3 + ph + pb
    ab = 1.0 - pb
    slg = (p1 + 2.0 * p2 + 3.0 * p3 + 4.0 * ph) / ab if ab > 1e-9 else 1e9
    wv = (w.single * p1 + w.double * p2 + w.triple * p3
          + w.homer * ph + w.walk * pb)
    num = rv.single * p1 + rv.walk * pb
    den = num + rv.extra_double * p2 + rv.extra_triple * p3 + rv.extra_homer * ph
    share = num / den if den > 0.0 else 0.0
    return (obp - targets.obp, slg - targets.slg,
            wv - targets.woba, share - targets.onbase_share)


def _objective(x, targets, rv, w) -> float:
    return sum(r * r for r in _stat_residuals(x, targets, rv, w))


def _line_minimize(f, lo, hi, coarse=33, refine=40):
    """Minimize f on [lo, hi]: coarse scan, then golden-section refinement
    around the best coarse point.  Deterministic; tolerant of mild
    non-unimodality, which is all the stat residuals exhibit."""
    if hi <= lo:
        return lo
    step = (hi - lo) / (coarse - 1)
    best_i, best_v = 0, f(lo)
    for i in range(1, coarse):
        v = f(lo + i * step)
        if v < best_v:
            best_i, best_v = i, v
    a = lo + max(best_i - 1, 0) * step
    b = lo + min(best_i + 1, coarse - 1) * step
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(refine):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def fit_ability_vector(targets: SlashTargets,
                       league: AbilityVector,
                       run_values: RunValues = DEFAULT_RUN_VALUES,
                       woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS,
                       *,
                       tol: float = 0.005,
                       max_steps: int = 10_000) -> AbilityVector:
    """Find a valid ability vector matching all four targets within tol.

    Only the five positive components affect the four stats, so the search
    runs projected coordinate descent over those, constrained to the simplex
    slice where their sum stays below 1.  The leftover out mass is split
    among k/g/f in the league vector's proportions, which leaves every stat
    untouched (outs never enter OBP, SLG, wOBA, or the on-base share).

    Raises :class:`InfeasibleTargetsError` if some stat still misses its
    target by more than tol after the iteration budget.
    """
    league = validate(league)
    league_pos = league.positives
    league_obp = math.fsum(league_pos)
    if league_obp <= 0.0 or league.out_mass <= 0.0:
        raise AbilityVectorError("league vector must have on-base and out mass")

    # Start from the league's positive profile scaled toward the target OBP.
    scale = min(targets.obp / league_obp, 0.999 / league_obp)
    x = [p * scale for p in league_pos]

    def objective(v):
        return _objective(v, targets, run_values, woba_weights)

    steps = 0
    while steps < max_steps:
        moved = 0.0
        for i in range(5):
            others = sum(x) - x[i]
            hi = max(1.0 - 1e-6 - others, 0.0)

            def f(v, i=i):
                trial = list(x)
                trial[i] = v
                return objective(trial)

            new = _line_minimize(f, 0.0, hi)
            moved = max(moved, abs(new - x[i]))
            x[i] = new
            steps += 1
            if steps >= max_steps:
                break
        residuals = _stat_residuals(x, targets, run_values, woba_weights)
        if max(abs(r) for r in residuals) <= tol * 0.25:
            break
        if moved < 1e-12:
            break

    residuals = _stat_residuals(x, targets, run_values, woba_weights)
    worst = max(abs(r) for r in residuals)
    if worst > tol:
        raise InfeasibleTargetsError(
            f"no vector within {tol} of targets {targets}; "
            f"worst residual {worst:.4f} after {steps} steps"
        )

    out = 1.0 - math.fsum(x)
    k_share = league.p_k / league.out_mass
    g_share = league.p_g / league.out_mass
    f_share = 1.0 - k_share - g_share
    fitted = AbilityVector(
        x[0], x[1], x[2], x[3], x[4],
        out * k_share, out * g_share, out * f_share,
    )
    return validate(fitted)


def fit_residuals(vector: AbilityVector, targets: SlashTargets,
                  run_values: RunValues = DEFAULT_RUN_VALUES,
                  woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS,
                  ) -> dict[str, float]:
    """Signed stat errors (fit minus target) of a fitted vector."""
    res = _stat_residuals(vector.positives, targets, run_values, woba_weights)
    return dict(zip(("obp", "slg", "woba", "onbase_share"), res))


def load_ability_vector(path) -> AbilityVector:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise AbilityVectorError(f"{path}: expected a JSON object")
    return AbilityVector.from_json_dict(obj)


def dump_ability_vector(vector: AbilityVector, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(vector.to_json_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


# Round-number league-average profile: the default anchor for lineup fitting
# and the default batter for synthetic event generation.
LEAGUE_AVERAGE = validate(AbilityVector(
    p_1b=0.150, p_2b=0.045, p_3b=0.004, p_hr=0.030,
    p_bb=0.080, p_k=0.170, p_g=0.280, p_f=0.241,
))

# Keep field order in sync with OUTCOME_KEYS; a handful of places zip them.
assert tuple(f.name for f in fields(AbilityVector)) == tuple(
    "p_" + k for k in OUTCOME_KEYS
)
