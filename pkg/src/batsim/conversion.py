"""Counterfactual ability conversion via a small hand-rolled MLP.

The question the model answers: if this batter traded overall quality
(wOBA shift, never positive) for a different on-base/long-hit balance
(a shift in the on-base value share), what would the full outcome
probability vector plausibly look like?  Answers are learned from pairs of
real-ish player profiles: for every ordered pair the network sees the source
profile plus the (share, wOBA) deltas and regresses the component-wise
difference to the destination profile.

The network is deliberately small (two ReLU layers of 100) and implemented
directly in numpy with hand-written backprop; a finite-difference gradient
check guards the derivation.  Everything is float64 and deterministic in
the seeds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .abilities import (
    DEFAULT_RUN_VALUES,
    DEFAULT_WOBA_WEIGHTS,
    AbilityVector,
    NoOutProbabilityError,
    RunValues,
    WobaWeights,
    onbase_share,
    validate,
    woba,
)

# The trailing fly-out component is implied by the others, so the network
# predicts only these seven; inputs append the two requested deltas.
REDUCED_KEYS = ("1b", "2b", "3b", "hr", "bb", "k", "g")
INPUT_ORDER = REDUCED_KEYS + ("d_onbase_share", "d_woba")
HIDDEN_WIDTH = 100

# Acceptance window for synthesized player pools.
WOBA_RANGE = (0.230, 0.420)
SHARE_RANGE = (0.35, 0.85)


class ConversionError(ValueError):
    pass


class ShapeMismatchError(ConversionError):
    pass


class EmptyBatchError(ConversionError):
    pass


class DatasetTooSmallError(ConversionError):
    pass


class InsufficientPlayersError(ConversionError):
    pass


class ProjectionFailureError(ConversionError):
    """The network output could not be projected to a usable vector."""


@dataclass(frozen=True)
class ReducedVector:
    """The seven free components of an ability vector (fly out dropped)."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != 7:
            raise ShapeMismatchError(f"expected 7 components, got {len(self.values)}")
        if any(v < 0.0 for v in self.values):
            raise ConversionError(f"negative component in {self.values}")
        if math.fsum(self.values) > 1.0 + 1e-9:
            raise ConversionError("components exceed total probability 1")

    @classmethod
    def from_ability(cls, vector: AbilityVector) -> "ReducedVector":
        return cls(values=vector.as_tuple()[:7])

    def to_ability(self) -> AbilityVector:
        return AbilityVector(*self.values, 1.0 - math.fsum(self.values))


@dataclass(frozen=True)
class ConversionSample:
    source: ReducedVector
    d_onbase_share: float
    d_woba: float
    delta: tuple[float, ...]


@dataclass(frozen=True)
class PairDataset:
    """Training pairs: inputs (N, 9) and component-delta targets (N, 7)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.inputs.shape[1] != 9:
            raise ShapeMismatchError(f"inputs must be (N, 9), got {self.inputs.shape}")
        if self.targets.shape != (self.inputs.shape[0], 7):
            raise ShapeMismatchError(f"targets must be (N, 7), got {self.targets.shape}")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def sample(self, i: int) -> ConversionSample:
        row = self.inputs[i]
        return ConversionSample(
            source=ReducedVector(values=tuple(row[:7])),
            d_onbase_share=float(row[7]),
            d_woba=float(row[8]),
            delta=tuple(self.targets[i]),
        )


@dataclass(frozen=True)
class LossWeights:
    """Term weights: negativity discourages components the projection would
    have to clamp; woba_consistency ties the predicted vector's wOBA to the
    requested shift."""

    negativity: float = 0.1
    woba_consistency: float = 0.5

    def __post_init__(self):
        if self.negativity < 0.0 or self.woba_consistency < 0.0:
            raise ValueError("loss weights must be non-negative")


@dataclass(frozen=True)
class ConverterParams:
    """Network weights, plus the stat coefficients they were trained under."""

    w1: np.ndarray  # (9, 100)
    b1: np.ndarray  # (100,)
    w2: np.ndarray  # (100, 100)
    b2: np.ndarray  # (100,)
    w3: np.ndarray  # (100, 7)
    b3: np.ndarray  # (7,)
    woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS

    def __post_init__(self):
        expected = {
            "w1": (9, HIDDEN_WIDTH), "b1": (HIDDEN_WIDTH,),
            "w2": (HIDDEN_WIDTH, HIDDEN_WIDTH), "b2": (HIDDEN_WIDTH,),
            "w3": (HIDDEN_WIDTH, 7), "b3": (7,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeMismatchError(f"{name} must have shape {shape}, "
                                         f"got {arr.shape}")

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2,
                "b2": self.b2, "w3": self.w3, "b3": self.b3}


def init_params(seed: int,
                woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS) -> ConverterParams:
    """He-style initialization; the output layer starts small so initial
    predictions sit near zero delta, which is the right prior."""
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x1217)))
    w1 = rng.normal(0.0, math.sqrt(2.0 / 9), size=(9, HIDDEN_WIDTH))
    w2 = rng.normal(0.0, math.sqrt(2.0 / HIDDEN_WIDTH),
                    size=(HIDDEN_WIDTH, HIDDEN_WIDTH))
    w3 = rng.normal(0.0, 0.1 * math.sqrt(1.0 / HIDDEN_WIDTH),
                    size=(HIDDEN_WIDTH, 7))
    return ConverterParams(w1=w1, b1=np.zeros(HIDDEN_WIDTH), w2=w2,
                           b2=np.zeros(HIDDEN_WIDTH), w3=w3, b3=np.zeros(7),
                           woba_weights=woba_weights)


def _as_batch(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (9,):
            raise ShapeMismatchError(f"expected 9 inputs, got {arr.shape}")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != 9:
        raise ShapeMismatchError(f"expected (N, 9) inputs, got {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyBatchError("empty input batch")
    return arr, False


def _forward_full(params: ConverterParams, x: np.ndarray):
    a1 = x @ params.w1 + params.b1
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ params.w2 + params.b2
    h2 = np.maximum(a2, 0.0)
    out = h2 @ params.w3 + params.b3
    return a1, h1, a2, h2, out


def forward(params: ConverterParams, x) -> np.ndarray:
    """Predicted component deltas for one input row or a batch."""
    batch, squeeze = _as_batch(x)
    out = _forward_full(params, batch)[4]
    return out[0] if squeeze else out


def _woba_component_vector(weights: WobaWeights) -> np.ndarray:
    # wOBA coefficients aligned with REDUCED_KEYS; outs carry no weight.
    return np.array(weights.as_component_array() + (0.0, 0.0))


def _unpack_batch(batch) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(batch, PairDataset):
        return batch.inputs, batch.targets
    x, y = batch
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[1] != 9 or y.shape != (x.shape[0], 7):
        raise ShapeMismatchError(f"bad batch shapes {x.shape}, {y.shape}")
    if x.shape[0] == 0:
        raise EmptyBatchError("empty batch")
    return x, y


def loss(params: ConverterParams, batch,
         weights: LossWeights = LossWeights()) -> float:
    """Mean per-pair loss: squared delta error, plus the negativity hinge on
    the implied destination components, plus the squared wOBA mismatch."""
    x, y = _unpack_batch(batch)
    out = _forward_full(params, x)[4]
    wvec = _woba_component_vector(params.woba_weights)

    err = out - y
    sq = np.sum(err * err, axis=1)
    implied = x[:, :7] + out
    hinge = np.sum(np.maximum(-implied, 0.0), axis=1)
    woba_err = err @ wvec
    per_pair = sq + weights.negativity * hinge \
        + weights.woba_consistency * woba_err * woba_err
    return float(per_pair.mean())


def gradients(params: ConverterParams, batch,
              weights: LossWeights = LossWeights()) -> dict[str, np.ndarray]:
    """Hand-derived backprop for :func:`loss`."""
    x, y = _unpack_batch(batch)
    n = x.shape[0]
    a1, h1, a2, h2, out = _forward_full(params, x)
    wvec = _woba_component_vector(params.woba_weights)

    err = out - y
    implied = x[:, :7] + out
    # d/d out of each term; the hinge's subgradient at exactly zero is zero.
    g_out = 2.0 * err
    g_out -= weights.negativity * (implied < 0.0)
    g_out += (2.0 * weights.woba_consistency) * (err @ wvec)[:, None] * wvec
    g_out /= n

    g_w3 = h2.T @ g_out
    g_b3 = g_out.sum(axis=0)
    g_h2 = g_out @ params.w3.T
    g_a2 = g_h2 * (a2 > 0.0)
    g_w2 = h1.T @ g_a2
    g_b2 = g_a2.sum(axis=0)
    g_h1 = g_a2 @ params.w2.T
    g_a1 = g_h1 * (a1 > 0.0)
    g_w1 = x.T @ g_a1
    g_b1 = g_a1.sum(axis=0)
    return {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2,
            "w3": g_w3, "b3": g_b3}


def gradient_check(params: ConverterParams, batch,
                   weights: LossWeights = LossWeights(), *,
                   probes: int = 100, step: float = 1e-5,
                   seed: int = 0) -> float:
    """Compare analytic gradients against central finite differences at
    randomly probed coordinates; returns the worst relative error."""
    analytic = gradients(params, batch, weights)
    arrays = params.arrays()
    rng = np.random.default_rng(seed)
    names = sorted(arrays)
    sizes = np.array([arrays[n].size for n in names])
    total = int(sizes.sum())
    worst = 0.0
    for flat_index in rng.choice(total, size=min(probes, total), replace=False):
        remaining = int(flat_index)
        for name, size in zip(names, sizes):
            if remaining < size:
                break
            remaining -= int(size)
        coords = np.unravel_index(remaining, arrays[name].shape)

        def loss_at(value):
            bumped = arrays[name].copy()
            bumped[coords] = value
            return loss(replace(params, **{name: bumped}), batch, weights)

        base = arrays[name][coords]
        numeric = (loss_at(base + step) - loss_at(base - step)) / (2.0 * step)
        exact = analytic[name][coords]
        scale = max(abs(numeric) + abs(exact), 1e-8)
        worst = max(worst, abs(numeric - exact) / scale)
    return worst


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 256
    max_epochs: int = 200
    patience: int = 10
    val_fraction: float = 0.2
    loss_weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self):
        if self.learning_rate <= 0 or not 0 <= self.momentum < 1:
            raise ValueError("bad optimizer settings")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise ValueError("bad schedule settings")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ValidationMetrics:
    mse_vector: float        # mean squared error summed over the 7 components
    mse_woba: float          # mean squared error of the implied wOBA
    neg_mass_raw: float      # mean clamped-away mass before projection
    neg_mass_projected: float
    val_loss: float
    epochs_run: int
    best_epoch: int


def evaluate(params: ConverterParams, batch,
             weights: LossWeights = LossWeights()) -> ValidationMetrics:
    x, y = _unpack_batch(batch)
    out = forward(params, x)
    wvec = _woba_component_vector(params.woba_weights)
    err = out - y
    mse_vector = float(np.sum(err * err, axis=1).mean())
    woba_err = err @ wvec
    mse_woba = float((woba_err * woba_err).mean())

    implied7 = x[:, :7] + out
    implied_f = 1.0 - implied7.sum(axis=1, keepdims=True)
    implied8 = np.hstack([implied7, implied_f])
    neg_raw = float(np.maximum(-implied8, 0.0).sum(axis=1).mean())
    clamped = np.maximum(implied8, 0.0)
    projected = clamped / clamped.sum(axis=1, keepdims=True)
    neg_projected = float(np.maximum(-projected, 0.0).sum())
    return ValidationMetrics(mse_vector=mse_vector, mse_woba=mse_woba,
                             neg_mass_raw=neg_raw,
                             neg_mass_projected=neg_projected,
                             val_loss=loss(params, (x, y), weights),
                             epochs_run=0, best_epoch=0)


def train(dataset: PairDataset, config: TrainConfig = TrainConfig(),
          seed: int = 0, *,
          woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS,
          ) -> tuple[ConverterParams, ValidationMetrics]:
    """Mini-batch gradient descent with momentum and early stopping.

    The pair set is split 80/20 (by config.val_fraction) with a permutation
    drawn from the seed; training stops once validation loss has not
    improved for config.patience epochs and the best-epoch weights are
    returned.  Fully deterministic in (dataset, config, seed).
    """
    n = len(dataset)
    if n < 10:
        raise DatasetTooSmallError(f"need at least 10 pairs, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x7A11)))
    perm = rng.permutation(n)
    n_val = max(1, int(round(n * config.val_fraction)))
    if n_val >= n:
        raise DatasetTooSmallError("validation split would consume every pair")
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_val, y_val = dataset.inputs[val_idx], dataset.targets[val_idx]
    x_train, y_train = dataset.inputs[train_idx], dataset.targets[train_idx]

    params = init_params(seed, woba_weights)
    arrays = {k: v.copy() for k, v in params.arrays().items()}
    velocity = {k: np.zeros_like(v) for k, v in arrays.items()}

    def snapshot() -> ConverterParams:
        return ConverterParams(**{k: v.copy() for k, v in arrays.items()},
                               woba_weights=woba_weights)

    best = snapshot()
    best_loss = math.inf
    best_epoch = 0
    stale = 0
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), config.batch_size):
            sel = order[start:start + config.batch_size]
            grads = gradients(snapshot_view(arrays, woba_weights),
                              (x_train[sel], y_train[sel]),
                              config.loss_weights)
            for key, g in grads.items():
                velocity[key] = config.momentum * velocity[key] \
                    - config.learning_rate * g
                arrays[key] += velocity[key]
        val_loss = loss(snapshot_view(arrays, woba_weights), (x_val, y_val),
                        config.loss_weights)
        if val_loss < best_loss - 1e-12:
            best_loss = val_loss
            best = snapshot()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break

    metrics = evaluate(best, (x_val, y_val), config.loss_weights)
    metrics = replace(metrics, epochs_run=epochs_run, best_epoch=best_epoch)
    return best, metrics


def snapshot_view(arrays: dict[str, np.ndarray],
                  woba_weights: WobaWeights) -> ConverterParams:
    """Zero-copy ConverterParams over live training arrays."""
    return ConverterParams(**arrays, woba_weights=woba_weights)


def synthesize_players(n: int = 502, seed: int = 0, *,
                       run_values: RunValues = DEFAULT_RUN_VALUES,
                       woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS,
                       ) -> list[AbilityVector]:
    """Generate a plausible player pool spanning the on-base/power plane.

    Profiles come from two latent traits (overall quality and a
    contact-versus-power tilt) mapped smoothly to outcome rates, plus a
    small jitter.  Draws falling outside the pool's wOBA or on-base-share
    window are rejected and redrawn, so the pool covers the window and
    little beyond it.
    """
    if n < 2:
        raise InsufficientPlayersError("need at least 2 players")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x9A7E)))
    players: list[AbilityVector] = []
    attempts = 0
    max_attempts = 200 * n
    while len(players) < n:
        attempts += 1
        if attempts > max_attempts:
            raise InsufficientPlayersError(
                f"only {len(players)} of {n} draws landed in the stat window")
        quality = rng.uniform(0.0, 1.0)
        contact = rng.uniform(0.0, 1.0)
        jitter = rng.normal(0.0, 0.0020, size=5)
        power = 1.0 - contact

        p_bb = 0.042 + 0.062 * quality + 0.028 * contact + jitter[0]
        p_1b = 0.118 + 0.036 * quality + 0.062 * contact - 0.020 * power + jitter[1]
        p_2b = 0.010 + 0.030 * quality * (1.0 - 0.5 * contact) + 0.014 * power + jitter[2]
        p_3b = 0.002 + 0.004 * quality + 0.005 * power + jitter[3] * 0.5
        p_hr = 0.003 + 0.010 * power + 0.070 * quality * power + jitter[4]
        positives = np.array([p_1b, p_2b, p_3b, p_hr, p_bb])
        if positives.min() <= 0.001:
            continue
        out_mass = 1.0 - positives.sum()
        k_frac = 0.26 + 0.20 * power + 0.06 * quality
        g_frac = (1.0 - k_frac) * (0.54 - 0.05 * power)
        f_frac = 1.0 - k_frac - g_frac
        vec = AbilityVector(p_1b, p_2b, p_3b, p_hr, p_bb,
                            out_mass * k_frac, out_mass * g_frac,
                            out_mass * f_frac)
        w = woba(vec, woba_weights)
        share = onbase_share(vec, run_values)
        if not (WOBA_RANGE[0] <= w <= WOBA_RANGE[1]):
            continue
        if not (SHARE_RANGE[0] <= share <= SHARE_RANGE[1]):
            continue
        players.append(validate(vec))
    return players


def build_pair_dataset(players, *,
                       run_values: RunValues = DEFAULT_RUN_VALUES,
                       woba_weights: WobaWeights = DEFAULT_WOBA_WEIGHTS,
                       ) -> PairDataset:
    """All unordered player pairs, oriented so the conversion never gains
    wOBA: the higher-wOBA profile is the source.  Equal-wOBA ties take the
    lower-share profile as source, so tied pairs ask for a non-negative
    share shift."""
    players = list(players)
    if len(players) < 2:
        raise InsufficientPlayersError("need at least 2 players to form pairs")
    comp = np.array([p.as_tuple()[:7] for p in players])
    wob = np.array([woba(p, woba_weights) for p in players])
    share = np.array([onbase_share(p, run_values) for p in players])

    ii, jj = np.triu_indices(len(players), k=1)
    take_j = (wob[jj] > wob[ii]) | ((wob[jj] == wob[ii]) & (share[jj] < share[ii]))
    src = np.where(take_j, jj, ii)
    dst = np.where(take_j, ii, jj)

    inputs = np.hstack([
        comp[src],
        (share[dst] - share[src])[:, None],
        (wob[dst] - wob[src])[:, None],
    ])
    targets = comp[dst] - comp[src]
    return PairDataset(inputs=inputs, targets=targets)


def project_probabilities(values) -> tuple[float, ...]:
    """Clamp negatives to zero and renormalize to a unit sum.  Vectors that
    are already valid pass through untouched, so the projection is exactly
    idempotent."""
    vals = tuple(float(v) for v in values)
    if len(vals) != 8:
        raise ShapeMismatchError(f"expected 8 components, got {len(vals)}")
    total = math.fsum(vals)
    if min(vals) >= 0.0 and abs(total - 1.0) <= 1e-12:
        return vals
    clamped = tuple(v if v > 0.0 else 0.0 for v in vals)
    total = math.fsum(clamped)
    if total <= 1e-9:
        raise ProjectionFailureError("no positive mass to renormalize")
    return tuple(v / total for v in clamped)


def convert(params: ConverterParams, vector: AbilityVector,
            d_onbase_share: float, d_woba: float) -> AbilityVector:
    """Produce the counterfactual profile for the requested shifts.

    d_woba must be non-positive: the conversion trades balance under a
    quality budget, it never invents a better hitter.  The network's raw
    answer is projected (clamp and renormalize) to a valid vector.
    """
    if d_woba > 0.0:
        raise ValueError(f"d_woba must be non-positive, got {d_woba}")
    validate(vector)
    x = np.array(vector.as_tuple()[:7] + (d_onbase_share, d_woba))
    delta = forward(params, x)
    implied = x[:7] + delta
    raw = tuple(implied) + (1.0 - float(implied.sum()),)
    projected = project_probabilities(raw)
    try:
        return validate(AbilityVector(*projected))
    except NoOutProbabilityError as exc:
        raise ProjectionFailureError(
            "projected vector has no out probability") from exc


def save_params(params: ConverterParams, path, *,
                loss_weights: LossWeights | None = None,
                train_seed: int | None = None) -> None:
    """Write params as JSON: layer arrays plus a metadata block recording the
    input ordering and, when known, the loss weights and training seed."""
    metadata: dict = {"input_order": list(INPUT_ORDER)}
    if loss_weights is not None:
        metadata["loss_weights"] = {
            "negativity": loss_weights.negativity,
            "woba_consistency": loss_weights.woba_consistency,
        }
    if train_seed is not None:
        metadata["train_seed"] = int(train_seed)
    obj = {
        "architecture": [9, HIDDEN_WIDTH, HIDDEN_WIDTH, 7],
        "input_order": list(INPUT_ORDER),
        "metadata": metadata,
        "woba_weights": {
            "walk": params.woba_weights.walk,
            "single": params.woba_weights.single,
            "double": params.woba_weights.double,
            "triple": params.woba_weights.triple,
            "homer": params.woba_weights.homer,
        },
        **{name: arr.tolist() for name, arr in params.arrays().items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_params(path) -> ConverterParams:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("architecture") != [9, HIDDEN_WIDTH, HIDDEN_WIDTH, 7]:
        raise ConversionError(f"unsupported architecture {obj.get('architecture')}")
    if obj.get("input_order") != list(INPUT_ORDER):
        raise ConversionError("input order does not match this build")
    weights = WobaWeights(**obj["woba_weights"])
    return ConverterParams(
        w1=np.array(obj["w1"]), b1=np.array(obj["b1"]),
        w2=np.array(obj["w2"]), b2=np.array(obj["b2"]),
        w3=np.array(obj["w3"]), b3=np.array(obj["b3"]),
        woba_weights=weights,
    )


PAIR_CSV_HEADER = ",".join(INPUT_ORDER) + "," + ",".join(
    f"d_{k}" for k in REDUCED_KEYS)


def dump_pair_csv(dataset: PairDataset, path) -> None:
    """Inspection dump: 9 input columns then the 7 target-delta columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(PAIR_CSV_HEADER + "\n")
        for i in range(len(dataset)):
            row = np.concatenate([dataset.inputs[i], dataset.targets[i]])
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
