from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

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

finite = st.floats(allow_nan=False, allow_infinity=False, width=32)


class TestEvaluateGoal:
    def test_threshold_below_inside(self):
        assert evaluate_goal(threshold_below(0, 10.0), 8.0) is True

    def test_threshold_below_outside(self):
        assert evaluate_goal(threshold_below(0, 10.0), 16.0) is False

    def test_threshold_boundary_violates(self):
        assert evaluate_goal(threshold_below(0, 10.0), 10.0) is False
        assert evaluate_goal(threshold_above(0, 10.0), 10.0) is False

    def test_setpoint_boundary_violates(self):
        assert evaluate_goal(setpoint(0, 8.0, 1.0), 9.0) is False

    def test_setpoint_inside(self):
        assert evaluate_goal(setpoint(0, 8.0, 1.0), 8.5) is True

    def test_optimize_kind_rejected(self):
        with pytest.raises(GoalError):
            evaluate_goal(optimize_min(0), 1.0)

    def test_nonfinite_quality_rejected(self):
        with pytest.raises(GoalError):
            evaluate_goal(threshold_below(0, 10.0), math.nan)
        with pytest.raises(GoalError):
            evaluate_goal(threshold_below(0, 10.0), math.inf)

    @given(bound=finite, q1=finite, q2=finite)
    def test_threshold_below_antitone(self, bound, q1, q2):
        lo, hi = min(q1, q2), max(q1, q2)
        goal = threshold_below(0, bound)
        if evaluate_goal(goal, hi):
            assert evaluate_goal(goal, lo)

    @given(target=finite, margin=st.floats(min_value=1e-6, max_value=1e6), d=finite)
    def test_setpoint_symmetric(self, target, margin, d):
        goal = setpoint(0, target, margin)
        if math.isfinite(target + d) and math.isfinite(target - d):
            assert evaluate_goal(goal, target + d) == evaluate_goal(goal, target - d)


class TestEvaluateOptimization:
    def test_unique_minimum(self):
        assert evaluate_optimization(optimize_min(0), [3, 1, 2]) == [False, True, False]

    def test_tie_marks_all(self):
        assert evaluate_optimization(optimize_min(0), [2, 2, 5]) == [True, True, False]

    def test_singleton_max(self):
        assert evaluate_optimization(optimize_max(0), [7]) == [True]

    def test_empty_rejected(self):
        with pytest.raises(GoalError):
            evaluate_optimization(optimize_min(0), [])

    def test_non_optimize_goal_rejected(self):
        with pytest.raises(GoalError):
            evaluate_optimization(threshold_below(0, 1.0), [1.0])

    @given(st.lists(finite, min_size=1, max_size=100), st.booleans())
    def test_marks_exactly_the_extrema(self, qs, maximize):
        goal = optimize_max(0) if maximize else optimize_min(0)
        marks = evaluate_optimization(goal, qs)
        best = max(qs) if maximize else min(qs)
        assert any(marks)
        assert marks == [q == best for q in qs]


class TestGoalSet:
    def test_satisfied_ignores_optimization(self):
        gs = GoalSet(
            thresholds=(threshold_below(0, 10.0),),
            setpoints=(setpoint(1, 10.0, 0.25),),
            optimization=optimize_min(2),
        )
        assert goalset_satisfied(gs, [8.0, 10.1, 1e9]) is True

    def test_threshold_failure(self):
        gs = GoalSet(
            thresholds=(threshold_below(0, 10.0),),
            setpoints=(setpoint(1, 10.0, 0.25),),
        )
        assert goalset_satisfied(gs, [12.0, 10.1]) is False

    def test_vacuous(self):
        assert goalset_satisfied(GoalSet(), [1.0, 2.0]) is True
        assert goalset_satisfied(GoalSet(), []) is True

    def test_index_out_of_range(self):
        gs = GoalSet(thresholds=(threshold_below(3, 10.0),))
        with pytest.raises(GoalError):
            goalset_satisfied(gs, [1.0, 2.0])

    def test_misplaced_kinds_rejected(self):
        with pytest.raises(GoalError):
            GoalSet(thresholds=(setpoint(0, 1.0, 0.1),))
        with pytest.raises(GoalError):
            GoalSet(setpoints=(threshold_below(0, 1.0),))
        with pytest.raises(GoalError):
            GoalSet(optimization=threshold_below(0, 1.0))

    def test_setpoint_margin_must_be_positive(self):
        with pytest.raises(GoalError):
            setpoint(0, 1.0, 0.0)
        with pytest.raises(GoalError):
            setpoint(0, 1.0, -1.0)

    @given(
        bounds=st.lists(st.floats(min_value=-100, max_value=100), min_size=0, max_size=3),
        targets=st.lists(
            st.tuples(
                st.floats(min_value=-100, max_value=100),
                st.floats(min_value=0.1, max_value=10),
            ),
            min_size=0,
            max_size=3,
        ),
        values=st.lists(st.floats(min_value=-200, max_value=200), min_size=6, max_size=6),
    )
    def test_satisfaction_is_conjunction(self, bounds, targets, values):
        thresholds = tuple(threshold_below(i, b) for i, b in enumerate(bounds))
        setpoints = tuple(
            setpoint(3 + i, t, m) for i, (t, m) in enumerate(targets[:3])
        )
        gs = GoalSet(thresholds=thresholds, setpoints=setpoints)
        expected = all(evaluate_goal(g, values[g.quality_index]) for g in gs.point_goals)
        assert goalset_satisfied(gs, values) == expected
