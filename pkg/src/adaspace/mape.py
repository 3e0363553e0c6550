"""MAPE loop orchestration: monitor, reduce, verify, plan, execute, learn.

Three approaches share the loop skeleton and differ in how they pick the
options to verify each cycle:

* ``learned``   - the reducer's predict/filter/explore plan, with online
                  model updates from every verification result;
* ``reference`` - exhaustive verification of the whole space;
* ``random``    - a seeded uniform sample sized to the learned approach's
                  verification budget (granularity + exploration), for a
                  fair baseline.

The runner can co-execute a zero-noise exhaustive oracle on the same
uncertainty trajectory. Its choice is recorded, never applied, and gives
each cycle a ground-truth optimum to benchmark realized qualities against.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np

from adaspace.goals import OPTIMIZE_MIN, THRESHOLD_BELOW, GoalSet, evaluate_goal
from adaspace.reducer import (
    TESTING,
    ReducerConfig,
    ReductionPlan,
    ingest_verification,
    prepare_features,
    reduce,
)
from adaspace.space import AdaptationSpace
from adaspace.verifier import QualityModel, VerificationResult, verify

LEARNED = "learned"
REFERENCE = "reference"
RANDOM = "random"
APPROACHES = (LEARNED, REFERENCE, RANDOM)


class MapeError(ValueError):
    """Loop input outside the contract."""


class ManagedSystemInterface(Protocol):
    """What the loop needs from a managed system simulator."""

    def enumerate_space(self) -> AdaptationSpace: ...

    def read_uncertainties(self): ...

    def uncertainty_features(self, state) -> np.ndarray: ...

    def apply_option(self, option_id: int) -> None: ...

    def advance_time(self) -> None: ...

    def quality_models(self, noise_stds=None, cost_ms=None) -> tuple[QualityModel, ...]: ...


@dataclass(frozen=True)
class CycleRecord:
    """One adaptation cycle's outcome. qualities holds the chosen option's
    ground-truth quality vector; reference_qualities the oracle optimum's
    (when co-executed). Simulated timings cover verification cost, the
    learning overhead is real measured time."""

    cycle: int
    approach: str
    seed: int
    mode: str
    n_total: int
    n_filtered: int
    n_explored: int
    n_verified: int
    chosen_id: int
    qualities: np.ndarray
    reference_id: int
    reference_qualities: np.ndarray | None
    t_total_sim_ms: float
    t_reduced_sim_ms: float
    t_learn_real_ms: float
    satisfied: tuple[bool, ...]
    cold_fallback: bool = False
    empty_fallback: bool = False

    def __post_init__(self) -> None:
        if self.mode == TESTING and self.n_verified != self.n_filtered + self.n_explored:
            raise MapeError("testing cycle counts do not add up")
        if min(self.t_total_sim_ms, self.t_reduced_sim_ms, self.t_learn_real_ms) < 0:
            raise MapeError("timings must be non-negative")


def _violation(goal, value: float) -> float:
    if goal.kind == THRESHOLD_BELOW:
        raw = max(0.0, value - goal.bound)
    else:
        raw = max(0.0, goal.bound - value)
    return raw / max(abs(goal.bound), 1e-12)


def plan_best_option(result: VerificationResult, goals: GoalSet) -> int:
    """The planner's selection rule over verified options: satisfy every
    threshold and setpoint if possible (falling back to least-violating),
    then optimize the optimization quality, then hold setpoints tightest,
    with all remaining ties broken by lowest option id."""
    ids = result.option_ids
    if ids.size == 0:
        raise MapeError("cannot plan over an empty verified set")
    qualities = result.qualities

    satisfied = np.ones(ids.size, dtype=bool)
    for goal in goals.point_goals:
        column = qualities[:, goal.quality_index]
        ok = np.fromiter(
            (evaluate_goal(goal, q) for q in column), dtype=bool, count=ids.size
        )
        satisfied &= ok
    pool = np.flatnonzero(satisfied)
    if pool.size == 0:
        violations = np.zeros(ids.size)
        for goal in goals.thresholds:
            column = qualities[:, goal.quality_index]
            violations += np.array([_violation(goal, q) for q in column])
        pool = np.flatnonzero(violations == violations.min())
        if goals.setpoints and pool.size > 1:
            distance = np.zeros(pool.size)
            for goal in goals.setpoints:
                distance += np.abs(qualities[pool, goal.quality_index] - goal.target)
            pool = pool[distance == distance.min()]

    if goals.optimization is not None:
        goal = goals.optimization
        column = qualities[pool, goal.quality_index]
        best = column.min() if goal.kind == OPTIMIZE_MIN else column.max()
        pool = pool[column == best]
    elif goals.setpoints and pool.size > 1:
        distance = np.zeros(pool.size)
        for goal in goals.setpoints:
            distance += np.abs(qualities[pool, goal.quality_index] - goal.target)
        pool = pool[distance == distance.min()]
    return int(ids[pool].min())


def point_goal_flags(goals: GoalSet, qualities) -> tuple[bool, ...]:
    """Per threshold/setpoint goal: does this quality vector satisfy it."""
    qualities = np.asarray(qualities, dtype=np.float64)
    return tuple(
        evaluate_goal(goal, float(qualities[goal.quality_index]))
        for goal in goals.point_goals
    )


def _per_option_cost(models: Sequence[QualityModel]) -> float:
    return float(sum(m.cost_ms for m in models))


def _random_plan(n: int, cfg: ReducerConfig, cycle_index: int, seed: int) -> ReductionPlan:
    budget = min(cfg.granularity + math.ceil(cfg.exploration_rate * n), n)
    rng = np.random.default_rng((seed, cycle_index, 4))
    ids = np.sort(rng.choice(n, size=budget, replace=False))
    return ReductionPlan(ids, np.empty(0, dtype=np.int64), TESTING)


def run_cycle(
    system: ManagedSystemInterface,
    goals: GoalSet,
    cfg: ReducerConfig,
    approach: str,
    cycle_index: int,
    seed: int,
    models: Sequence[QualityModel],
    oracle_models: Sequence[QualityModel] | None = None,
) -> tuple[CycleRecord, ReducerConfig]:
    """One full MAPE cycle; returns the record and the (possibly updated)
    reducer configuration. The cycle reads uncertainties, verifies the
    approach's plan, applies the planner's choice, feeds the verification
    results back into the models (learned approach only), and finally
    advances simulated time."""
    if approach not in APPROACHES:
        raise MapeError(f"unknown approach {approach!r}")
    space = system.enumerate_space()
    n = space.size
    state = system.read_uncertainties()
    tail = system.uncertainty_features(state)

    learn_started = time.perf_counter()
    if approach == LEARNED:
        plan = reduce(space, tail, goals, cfg, cycle_index, seed)
    elif approach == REFERENCE:
        plan = ReductionPlan(np.arange(n), np.empty(0, dtype=np.int64), TESTING)
    else:
        plan = _random_plan(n, cfg, cycle_index, seed)
    learn_ms = (time.perf_counter() - learn_started) * 1000.0

    result = verify(plan.verified_ids, state, models, seed=(seed, cycle_index, 3))
    chosen = plan_best_option(result, goals)
    system.apply_option(chosen)

    if approach == LEARNED:
        learn_started = time.perf_counter()
        features = prepare_features(space, tail, cfg)[plan.verified_ids]
        updated = ingest_verification(cfg.models, features, result.qualities, goals)
        cfg = replace(cfg, models=updated)
        learn_ms += (time.perf_counter() - learn_started) * 1000.0
    else:
        learn_ms = 0.0

    oracle = oracle_models if oracle_models is not None else ()
    if oracle:
        oracle_result = verify(
            np.arange(n), state, oracle, seed=(seed, cycle_index, 5)
        )
        reference_id = plan_best_option(oracle_result, goals)
        reference_qualities = oracle_result.qualities[reference_id]
        realized = oracle_result.qualities[chosen]
    else:
        reference_id = -1
        reference_qualities = None
        truth = verify([chosen], state, _zero_noise(models), seed=0)
        realized = truth.qualities[0]

    record = CycleRecord(
        cycle=cycle_index,
        approach=approach,
        seed=seed,
        mode=plan.mode,
        n_total=n,
        n_filtered=int(plan.filtered.size),
        n_explored=int(plan.explored.size),
        n_verified=plan.n_verified,
        chosen_id=chosen,
        qualities=realized,
        reference_id=reference_id,
        reference_qualities=reference_qualities,
        t_total_sim_ms=n * _per_option_cost(models),
        t_reduced_sim_ms=result.simulated_ms,
        t_learn_real_ms=learn_ms,
        satisfied=point_goal_flags(goals, realized),
        cold_fallback=plan.cold_fallback,
        empty_fallback=plan.empty_fallback,
    )
    system.advance_time()
    return record, cfg


def _zero_noise(models: Sequence[QualityModel]) -> tuple[QualityModel, ...]:
    return tuple(replace(m, noise_std=0.0) for m in models)


def run_approach(
    system: ManagedSystemInterface,
    goals: GoalSet,
    cfg: ReducerConfig,
    approach: str,
    n_cycles: int,
    seed: int,
    noise_stds=None,
    cost_ms=None,
    with_oracle: bool = True,
) -> tuple[list[CycleRecord], ReducerConfig]:
    """Runs one approach for n_cycles on a freshly seeded system. Oracle
    co-execution verifies the whole space noise-free each cycle, indexing
    the oracle result by option id (the oracle plan is the identity)."""
    if n_cycles < 1:
        raise MapeError("need at least one cycle")
    models = system.quality_models(noise_stds=noise_stds, cost_ms=cost_ms)
    oracle_models = (
        system.quality_models(
            noise_stds=(0.0,) * len(models),
            cost_ms=(0.0,) * len(models),
        )
        if with_oracle
        else None
    )
    records: list[CycleRecord] = []
    for cycle in range(n_cycles):
        record, cfg = run_cycle(
            system, goals, cfg, approach, cycle, seed, models, oracle_models
        )
        records.append(record)
    return records, cfg
