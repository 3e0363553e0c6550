"""Quality goals and their satisfaction predicates.

Three goal kinds are supported:

* threshold goals keep a quality strictly below (or above) a bound,
* setpoint goals keep a quality strictly inside a margin around a target,
* optimization goals minimize or maximize a quality relative to the other
  options under consideration.

All inequalities are strict: a value sitting exactly on a bound or exactly on
the edge of a setpoint window violates the goal. Optimization goals are
set-relative, so they have no per-value predicate; ``evaluate_optimization``
marks the arg-extrema of a batch instead, and ties mark every extremum.
Quality vectors are plain float sequences ordered by the owning system's
quality names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

THRESHOLD_BELOW = "threshold-below"
THRESHOLD_ABOVE = "threshold-above"
SETPOINT = "setpoint"
OPTIMIZE_MIN = "optimize-min"
OPTIMIZE_MAX = "optimize-max"

_THRESHOLD_KINDS = (THRESHOLD_BELOW, THRESHOLD_ABOVE)
_OPTIMIZE_KINDS = (OPTIMIZE_MIN, OPTIMIZE_MAX)
_ALL_KINDS = _THRESHOLD_KINDS + (SETPOINT,) + _OPTIMIZE_KINDS


class GoalError(ValueError):
    """A goal was constructed or used outside its contract."""


@dataclass(frozen=True)
class Goal:
    kind: str
    quality_index: int
    name: str = ""
    bound: float = math.nan
    target: float = math.nan
    margin: float = math.nan

    def __post_init__(self) -> None:
        if self.kind not in _ALL_KINDS:
            raise GoalError(f"unknown goal kind {self.kind!r}")
        if self.quality_index < 0:
            raise GoalError("quality_index must be >= 0")
        if self.kind in _THRESHOLD_KINDS and not math.isfinite(self.bound):
            raise GoalError("threshold goal needs a finite bound")
        if self.kind == SETPOINT:
            if not math.isfinite(self.target):
                raise GoalError("setpoint goal needs a finite target")
            if not (math.isfinite(self.margin) and self.margin > 0):
                raise GoalError("setpoint margin must be finite and > 0")

    @property
    def is_threshold(self) -> bool:
        return self.kind in _THRESHOLD_KINDS

    @property
    def is_setpoint(self) -> bool:
        return self.kind == SETPOINT

    @property
    def is_optimization(self) -> bool:
        return self.kind in _OPTIMIZE_KINDS


def threshold_below(quality_index: int, bound: float, name: str = "") -> Goal:
    return Goal(THRESHOLD_BELOW, quality_index, name=name, bound=bound)


def threshold_above(quality_index: int, bound: float, name: str = "") -> Goal:
    return Goal(THRESHOLD_ABOVE, quality_index, name=name, bound=bound)


def setpoint(quality_index: int, target: float, margin: float, name: str = "") -> Goal:
    return Goal(SETPOINT, quality_index, name=name, target=target, margin=margin)


def optimize_min(quality_index: int, name: str = "") -> Goal:
    return Goal(OPTIMIZE_MIN, quality_index, name=name)


def optimize_max(quality_index: int, name: str = "") -> Goal:
    return Goal(OPTIMIZE_MAX, quality_index, name=name)


def evaluate_goal(goal: Goal, q: float) -> bool:
    """Point-wise satisfaction of one threshold or setpoint goal."""
    if goal.is_optimization:
        raise GoalError("optimization goals are set-relative, use evaluate_optimization")
    if not math.isfinite(q):
        raise GoalError(f"quality value must be finite, got {q!r}")
    if goal.kind == THRESHOLD_BELOW:
        return q < goal.bound
    if goal.kind == THRESHOLD_ABOVE:
        return q > goal.bound
    return abs(q - goal.target) < goal.margin


def evaluate_optimization(goal: Goal, qs: Sequence[float]) -> list[bool]:
    """Marks the entries attaining the extremum; ties mark all of them."""
    if not goal.is_optimization:
        raise GoalError("evaluate_optimization requires an optimize-min/max goal")
    if len(qs) == 0:
        raise GoalError("empty quality list")
    for q in qs:
        if not math.isfinite(q):
            raise GoalError(f"quality value must be finite, got {q!r}")
    best = min(qs) if goal.kind == OPTIMIZE_MIN else max(qs)
    return [q == best for q in qs]


@dataclass(frozen=True)
class GoalSet:
    thresholds: tuple[Goal, ...] = ()
    setpoints: tuple[Goal, ...] = ()
    optimization: Goal | None = None

    def __post_init__(self) -> None:
        for goal in self.thresholds:
            if not goal.is_threshold:
                raise GoalError(f"{goal.kind} goal in thresholds")
        for goal in self.setpoints:
            if not goal.is_setpoint:
                raise GoalError(f"{goal.kind} goal in setpoints")
        if self.optimization is not None and not self.optimization.is_optimization:
            raise GoalError(f"{self.optimization.kind} goal in optimization slot")

    @property
    def point_goals(self) -> tuple[Goal, ...]:
        return self.thresholds + self.setpoints

    def max_quality_index(self) -> int:
        indices = [g.quality_index for g in self.point_goals]
        if self.optimization is not None:
            indices.append(self.optimization.quality_index)
        return max(indices, default=-1)


def goalset_satisfied(gs: GoalSet, qualities: Sequence[float]) -> bool:
    """True iff every threshold and setpoint goal holds; optimization ignored."""
    if gs.max_quality_index() >= len(qualities):
        raise GoalError("quality vector does not cover all goal indices")
    return all(evaluate_goal(g, qualities[g.quality_index]) for g in gs.point_goals)
