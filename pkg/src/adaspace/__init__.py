"""Adaptation-space reduction for MAPE-K self-adaptive systems.

The package shrinks large discrete adaptation spaces with online linear
learning so that per-cycle verification only has to look at a small,
goal-relevant subset of options. It ships two simulated managed systems
(an IoT mesh and a service-based workflow), a verification stand-in with
simulated cost, a benchmark harness with exhaustive and random baselines,
and the metrics used to compare them.
"""

from adaspace.goals import (
    Goal,
    GoalError,
    GoalSet,
    evaluate_goal,
    evaluate_optimization,
    goalset_satisfied,
    optimize_max,
    optimize_min,
    setpoint,
    threshold_above,
    threshold_below,
)
from adaspace.space import AdaptationOption, AdaptationSpace, Dimension, SpaceError

__version__ = "0.1.0"

__all__ = [
    "AdaptationOption",
    "AdaptationSpace",
    "Dimension",
    "Goal",
    "GoalError",
    "GoalSet",
    "SpaceError",
    "evaluate_goal",
    "evaluate_optimization",
    "goalset_satisfied",
    "optimize_max",
    "optimize_min",
    "setpoint",
    "threshold_above",
    "threshold_below",
    "__version__",
]
