"""Adaptation-space reduction: predict, filter, explore, learn.

The reducer runs once per adaptation cycle. During warm-up it schedules
verification batches so the models see labeled data; afterwards it predicts
every option's goal outcomes with the online models, keeps the most
promising options up to the configured granularity, and adds a small
exploration sample from the discarded remainder so the models keep
receiving data from the whole space.

Filtering is staged: threshold goals drop options predicted non-compliant
(one joint classifier covers all threshold goals; class bit i is the i-th
goal), then each setpoint goal keeps the g options with predicted quality
closest to its target, then the optimization goal keeps the g best by
predicted quality. The result ordering is the last stage's ordering;
within a stage ties break by ascending option id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from adaspace.features import (
    FeatureMask,
    Scaler,
    apply_scaler,
    compose_features,
    select_features,
)
from adaspace.goals import OPTIMIZE_MIN, GoalSet
from adaspace.learners import OnlineModel, learn_batch, predict, targets_from_qualities
from adaspace.space import AdaptationSpace

TRAINING = "training"
TESTING = "testing"
STRATEGIES = ("random", "round-robin")


class ReducerError(ValueError):
    """Reducer configuration or input outside the contract."""


@dataclass(frozen=True)
class ReducerConfig:
    """Frozen runtime configuration produced by the design stage."""

    exploration_rate: float
    warmup_count: int
    granularity: int
    mask: FeatureMask
    scaler: Scaler
    models: Mapping[str, OnlineModel]
    training_strategy: str = "round-robin"
    training_budget: int | None = None  # None verifies the whole space

    def __post_init__(self) -> None:
        if not 0.0 <= self.exploration_rate <= 1.0:
            raise ReducerError("exploration rate must be in [0, 1]")
        if self.warmup_count < 0:
            raise ReducerError("warm-up count must be >= 0")
        if self.granularity < 1:
            raise ReducerError("granularity must be >= 1")
        if self.training_strategy not in STRATEGIES:
            raise ReducerError(f"training strategy must be one of {STRATEGIES}")
        if self.training_budget is not None and self.training_budget < 1:
            raise ReducerError("training budget must be >= 1 when set")
        object.__setattr__(self, "models", dict(self.models))
        n = len(self.mask)
        if self.scaler.n_features != n:
            raise ReducerError(
                f"scaler covers {self.scaler.n_features} features, mask selects {n}"
            )
        for name, model in self.models.items():
            if model.n_features != n:
                raise ReducerError(
                    f"model {name!r} expects {model.n_features} features, "
                    f"mask selects {n}"
                )

    def validate_for(self, goals: GoalSet) -> None:
        """Every goal must have its model: one joint classifier for all
        threshold goals, one regressor per setpoint/optimization goal."""
        point_goals = list(goals.setpoints)
        if goals.optimization is not None:
            point_goals.append(goals.optimization)
        names = [g.name for g in point_goals]
        if any(not n for n in names):
            raise ReducerError("setpoint/optimization goals need names")
        if len(set(names)) != len(names):
            raise ReducerError("goal names must be unique")
        if goals.thresholds:
            model = self.models.get("thresholds")
            if model is None:
                raise ReducerError("threshold goals need a 'thresholds' classifier")
            if not model.is_classifier:
                raise ReducerError("'thresholds' model must be a classifier")
            expected = tuple(range(2 ** len(goals.thresholds)))
            if model.classes != expected:
                raise ReducerError(
                    f"'thresholds' classifier must have classes {expected}"
                )
        for name in names:
            model = self.models.get(name)
            if model is None:
                raise ReducerError(f"goal {name!r} has no model assigned")
            if model.is_classifier:
                raise ReducerError(f"goal {name!r} needs a regressor")


@dataclass(frozen=True)
class ReductionPlan:
    """Option ids to verify this cycle: the filtered candidates first,
    then the exploration sample. Fallback flags record degraded cycles."""

    filtered: np.ndarray
    explored: np.ndarray
    mode: str
    cold_fallback: bool = False
    empty_fallback: bool = False

    def __post_init__(self) -> None:
        for name in ("filtered", "explored"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mode not in (TRAINING, TESTING):
            raise ReducerError(f"unknown mode {self.mode!r}")
        overlap = np.intersect1d(self.filtered, self.explored)
        if overlap.size:
            raise ReducerError("filtered and explored sets overlap")

    @property
    def verified_ids(self) -> np.ndarray:
        return np.concatenate([self.filtered, self.explored])

    @property
    def n_verified(self) -> int:
        return int(self.filtered.size + self.explored.size)


def predict_goal_values(
    space: AdaptationSpace, uncertainty, cfg: ReducerConfig
) -> dict[str, np.ndarray]:
    """Model inputs and outputs for every option in the space: compose
    features, mask, scale, then one prediction vector per assigned model."""
    features = prepare_features(space, uncertainty, cfg)
    return {name: predict(model, features) for name, model in cfg.models.items()}


def prepare_features(
    space: AdaptationSpace, uncertainty, cfg: ReducerConfig
) -> np.ndarray:
    features = compose_features(space, uncertainty)
    features = select_features(features, cfg.mask)
    return apply_scaler(cfg.scaler, features)


def filter_options(
    option_ids,
    predictions: Mapping[str, np.ndarray],
    g: int,
    goals: GoalSet,
) -> np.ndarray:
    """Staged goal filter over predicted values. predictions holds one
    aligned vector per model: class labels under 'thresholds', predicted
    qualities under each setpoint/optimization goal name."""
    ids = np.asarray(option_ids, dtype=np.int64)
    if g < 1:
        raise ReducerError("granularity must be >= 1")
    pos = np.arange(ids.size)

    def aligned(name: str) -> np.ndarray:
        try:
            values = np.asarray(predictions[name])
        except KeyError:
            raise ReducerError(f"missing predictions for {name!r}") from None
        if values.shape != ids.shape:
            raise ReducerError(f"predictions for {name!r} not aligned with options")
        return values

    if goals.thresholds:
        labels = aligned("thresholds").astype(np.int64)
        for bit in range(len(goals.thresholds)):
            pos = pos[(labels[pos] >> bit) & 1 == 1]
    ranked = False
    for goal in goals.setpoints:
        distance = np.abs(aligned(goal.name).astype(np.float64)[pos] - goal.target)
        pos = pos[np.lexsort((ids[pos], distance))][:g]
        ranked = True
    if goals.optimization is not None:
        goal = goals.optimization
        quality = aligned(goal.name).astype(np.float64)[pos]
        key = quality if goal.kind == OPTIMIZE_MIN else -quality
        pos = pos[np.lexsort((ids[pos], key))][:g]
        ranked = True
    if not ranked:
        pos = pos[:g]
    return ids[pos]


def determine_exploration(option_ids, filtered, exploration_rate: float, seed) -> np.ndarray:
    """Uniform sample without replacement from the unfiltered remainder,
    sized ceil(e * N) but never exceeding the remainder; ascending ids."""
    ids = np.asarray(option_ids, dtype=np.int64)
    complement = np.setdiff1d(ids, np.asarray(filtered, dtype=np.int64))
    size = min(math.ceil(exploration_rate * ids.size), complement.size)
    if size == 0:
        return np.empty(0, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(complement, size=size, replace=False))


def training_batch(
    n_options: int, budget: int | None, strategy: str, cycle_index: int, seed
) -> np.ndarray:
    size = n_options if budget is None else min(budget, n_options)
    if strategy == "round-robin":
        start = (cycle_index * size) % n_options
        return (start + np.arange(size)) % n_options
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_options, size=size, replace=False))


def _cold_models(cfg: ReducerConfig) -> bool:
    return any(model.cold for model in cfg.models.values())


def reduce(
    space: AdaptationSpace,
    uncertainty,
    goals: GoalSet,
    cfg: ReducerConfig,
    cycle_index: int,
    seed: int = 0,
) -> ReductionPlan:
    """One cycle's verification plan. Cycles before the warm-up count
    schedule training batches; later cycles filter on model predictions and
    add the exploration sample. Two degraded paths keep the planner fed:
    cold models fall back to a training-style batch, and an empty filter
    result falls back to the g best options by the optimization regressor
    (or a random sample when there is none)."""
    cfg.validate_for(goals)
    n = space.size
    if cycle_index < cfg.warmup_count:
        batch = training_batch(
            n, cfg.training_budget, cfg.training_strategy,
            cycle_index, (seed, cycle_index, 0),
        )
        return ReductionPlan(batch, np.empty(0, dtype=np.int64), TRAINING)
    if _cold_models(cfg):
        batch = training_batch(
            n, cfg.training_budget, cfg.training_strategy,
            cycle_index, (seed, cycle_index, 0),
        )
        return ReductionPlan(
            batch, np.empty(0, dtype=np.int64), TESTING, cold_fallback=True
        )

    all_ids = np.arange(n)
    predictions = predict_goal_values(space, uncertainty, cfg)
    filtered = filter_options(all_ids, predictions, cfg.granularity, goals)
    empty_fallback = False
    if filtered.size == 0:
        empty_fallback = True
        if goals.optimization is not None:
            goal = goals.optimization
            quality = np.asarray(predictions[goal.name], dtype=np.float64)
            key = quality if goal.kind == OPTIMIZE_MIN else -quality
            filtered = all_ids[np.lexsort((all_ids, key))][: cfg.granularity]
        else:
            size = min(math.ceil(cfg.exploration_rate * n), n)
            size = max(size, 1)
            rng = np.random.default_rng((seed, cycle_index, 2))
            filtered = np.sort(rng.choice(n, size=size, replace=False))
    explored = determine_exploration(
        all_ids, filtered, cfg.exploration_rate, (seed, cycle_index, 1)
    )
    return ReductionPlan(filtered, explored, TESTING, empty_fallback=empty_fallback)


def ingest_verification(
    models: Mapping[str, OnlineModel],
    features,
    qualities,
    goals: GoalSet,
) -> dict[str, OnlineModel]:
    """One online update per verified option for every assigned model.
    features rows must already be masked and scaled (the representation the
    models were trained on); qualities rows are the verified values."""
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    Q = np.atleast_2d(np.asarray(qualities, dtype=np.float64))
    if X.shape[0] != Q.shape[0]:
        raise ReducerError(
            f"{X.shape[0]} feature rows but {Q.shape[0]} quality rows"
        )
    updated = dict(models)
    for target in targets_from_qualities(Q, goals):
        model = updated.get(target.name)
        if model is None:
            raise ReducerError(f"no model assigned for target {target.name!r}")
        updated[target.name] = learn_batch(model, X, target.values)
    return updated
