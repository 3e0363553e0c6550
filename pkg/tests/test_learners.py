from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaspace.learners import (
    Hyperparams,
    LearnerError,
    OnlineModel,
    decision_scores,
    deserialize_model,
    learn_batch,
    learn_online,
    load_model,
    make_model,
    predict,
    save_model,
    serialize_model,
)

NO_PENALTY = Hyperparams(alpha=0.0)


def warm_classifier(model: OnlineModel) -> OnlineModel:
    """Marks every class as seen without touching the weights."""
    return deserialize_model(
        {**serialize_model(model), "seen_classes": list(model.classes)}
    )


class TestPerceptronHandSteps:
    def test_single_mistake_update(self):
        # All-zero start: both one-vs-rest rows have y*score = 0 and update.
        m = make_model("perceptron", 2, classes=(0, 1))
        m = learn_online(m, (1.0, 1.0), 1)
        assert m.weights.tolist() == [[-1.0, -1.0], [1.0, 1.0]]
        assert m.intercepts.tolist() == [-1.0, 1.0]
        warmed = warm_classifier(m)
        assert predict(warmed, [(1.0, 1.0)])[0] == 1
        assert predict(warmed, [(-1.0, -1.0)])[0] == 0

    def test_correct_with_margin_leaves_weights(self):
        m = make_model("perceptron", 2, classes=(0, 1))
        m = learn_online(m, (1.0, 1.0), 1)
        again = learn_online(m, (1.0, 1.0), 1)
        assert np.array_equal(again.weights, m.weights)
        assert again.n_updates == m.n_updates + 1

    def test_four_class_stream(self):
        # Hand-traced: sample 1 updates all rows, sample 2 updates rows 0 and
        # 2, sample 3 is scored correctly by every row and changes nothing.
        m = make_model("perceptron", 3, classes=(0, 1, 2, 3))
        stream = [((1.0, 0.0, 1.0), 2), ((1.0, 0.0, 0.0), 0), ((1.0, 0.0, 1.0), 2)]
        for x, target in stream:
            m = learn_online(m, x, target)
        assert m.weights.tolist() == [
            [0.0, 0.0, -1.0],
            [-1.0, 0.0, -1.0],
            [0.0, 0.0, 1.0],
            [-1.0, 0.0, -1.0],
        ]
        assert m.intercepts.tolist() == [0.0, -1.0, 0.0, -1.0]
        assert m.n_updates == 3
        assert m.seen_classes == {0, 2}
        assert predict(m, [(1.0, 0.0, 1.0)])[0] == 2

    def test_score_tie_goes_to_lowest_class(self):
        m = make_model("perceptron", 3, classes=(0, 1, 2, 3))
        for x, target in [((1.0, 0.0, 1.0), 2), ((1.0, 0.0, 0.0), 0)]:
            m = learn_online(m, x, target)
        scores = decision_scores(m, [(1.0, 0.0, 0.0)])[0]
        assert scores[0] == scores[2] == max(scores)
        assert predict(m, [(1.0, 0.0, 0.0)])[0] == 0

    def test_mistake_bound_on_separable_stream(self):
        # Classic bound: total mistakes <= (R/gamma)^2 with R and gamma taken
        # over intercept-augmented points for the best unit separator we know.
        rng = np.random.default_rng(7)
        w_true = rng.normal(size=4)
        b_true = 0.3
        X = rng.uniform(-1.0, 1.0, size=(120, 4))
        raw = X @ w_true + b_true
        keep = np.abs(raw) >= 0.2
        X, raw = X[keep], raw[keep]
        labels = (raw > 0).astype(int)
        assert len(set(labels)) == 2

        aug = np.hstack([X, np.ones((X.shape[0], 1))])
        u = np.append(w_true, b_true)
        u = u / np.linalg.norm(u)
        gamma = np.min(np.where(labels == 1, 1.0, -1.0) * (aug @ u))
        radius = np.max(np.linalg.norm(aug, axis=1))
        bound = (radius / gamma) ** 2

        m = make_model("perceptron", 4, classes=(0, 1))
        mistakes = 0
        for _ in range(60):
            clean = True
            for x, target in zip(X, labels):
                updated = learn_online(m, x, target)
                if not np.array_equal(updated.weights, m.weights):
                    mistakes += 1
                    clean = False
                m = updated
            if clean:
                break
        assert clean, "perceptron failed to converge on separable data"
        assert mistakes <= bound
        assert np.array_equal(predict(m, X), labels)


class TestPassiveAggressiveHandSteps:
    def test_uncapped_hinge_step(self):
        # loss = 1, |x|^2 = 1, tau = min(C=1, 1) = 1 on both rows.
        m = make_model("pa-classifier", 2, classes=(0, 1))
        m = learn_online(m, (1.0, 0.0), 1)
        assert m.weights.tolist() == [[-1.0, 0.0], [1.0, 0.0]]
        assert m.intercepts.tolist() == [-1.0, 1.0]

    def test_capped_hinge_step(self):
        m = make_model(
            "pa-classifier", 2, classes=(0, 1), hyperparams=Hyperparams(cap_c=0.1)
        )
        m = learn_online(m, (1.0, 0.0), 1)
        assert m.weights.tolist() == [[-0.1, 0.0], [0.1, 0.0]]
        assert m.intercepts.tolist() == [-0.1, 0.1]

    def test_squared_hinge_step_keeps_cap_out_of_it(self):
        # tau = loss / (|x|^2 + 1/(2C)) = 1 / 1.5 regardless of the cap test.
        m = make_model("pa-classifier", 2, classes=(0, 1), loss="squared")
        m = learn_online(m, (1.0, 0.0), 1)
        assert m.weights[1].tolist() == pytest.approx([2.0 / 3.0, 0.0])
        assert m.intercepts.tolist() == pytest.approx([-2.0 / 3.0, 2.0 / 3.0])

    def test_zero_norm_sample_is_skipped(self):
        m = make_model("pa-classifier", 2, classes=(0, 1))
        m = learn_online(m, (0.0, 0.0), 1)
        assert not m.weights.any()
        assert not m.intercepts.any()
        assert m.n_updates == 1

    def test_regressor_epsilon_insensitive_step(self):
        # err = 1, loss = 0.9, |x|^2 = 4, tau = min(1, 0.225) = 0.225.
        m = make_model("pa-regressor", 2)
        m = learn_online(m, (2.0, 0.0), 1.0)
        assert m.weights.tolist() == [[0.45, 0.0]]
        assert m.intercepts.tolist() == [0.225]

    def test_regressor_squared_epsilon_step(self):
        # tau = 1.9 / (1 + 0.5) = 19/15.
        m = make_model("pa-regressor", 1, loss="squared-epsilon-insensitive")
        m = learn_online(m, (1.0,), 2.0)
        assert m.weights[0, 0] == pytest.approx(19.0 / 15.0)
        assert m.intercepts[0] == pytest.approx(19.0 / 15.0)

    def test_regressor_within_tube_does_nothing(self):
        m = make_model("pa-regressor", 1)
        m = learn_online(m, (1.0,), 0.05)
        assert not m.weights.any()

    @given(
        x=st.lists(
            st.floats(min_value=-5, max_value=5, allow_nan=False),
            min_size=3,
            max_size=3,
        ),
        target=st.integers(min_value=0, max_value=1),
    )
    def test_hinge_loss_never_increases(self, x, target):
        m = make_model("pa-classifier", 3, classes=(0, 1))
        y = np.array([-1.0, -1.0])
        y[target] = 1.0

        def hinge(model):
            s = decision_scores(model, [x])[0]
            return np.maximum(0.0, 1.0 - y * s)

        before = hinge(m)
        m = learn_online(m, x, target)
        after = hinge(m)
        assert np.all(after <= before + 1e-12)
        if np.asarray(x).dot(x) > 0:
            # An uncapped (C=1, loss<=|x|^2 not required: intercept adds slack)
            # update drives the loss of every active row to zero.
            taus = np.minimum(1.0, before / np.asarray(x).dot(x))
            fully_corrected = taus * (np.asarray(x).dot(x) + 1.0) >= before
            assert np.all(after[fully_corrected] <= 1e-12)


class TestSgdHandSteps:
    def test_log_loss_step(self):
        m = make_model(
            "sgd-classifier", 1, classes=(0, 1), loss="log", hyperparams=NO_PENALTY
        )
        m = learn_online(m, (1.0,), 1)
        assert m.weights.tolist() == [[-0.005], [0.005]]
        assert m.intercepts.tolist() == [-0.005, 0.005]

    def test_hinge_step(self):
        m = make_model("sgd-classifier", 1, classes=(0, 1), hyperparams=NO_PENALTY)
        m = learn_online(m, (1.0,), 1)
        assert m.weights.tolist() == [[-0.01], [0.01]]

    def test_squared_loss_step(self):
        m = make_model(
            "sgd-classifier", 1, classes=(0, 1), loss="squared", hyperparams=NO_PENALTY
        )
        m = learn_online(m, (1.0,), 1)
        assert np.allclose(m.weights, [[-0.02], [0.02]])

    def test_regressor_squared_step(self):
        m = make_model(
            "sgd-regressor", 1, hyperparams=Hyperparams(eta=0.1, alpha=0.0)
        )
        m = learn_online(m, (1.0,), 2.0)
        assert m.weights[0, 0] == pytest.approx(0.4)
        assert m.intercepts[0] == pytest.approx(0.4)

    def test_regressor_epsilon_insensitive_step(self):
        m = make_model(
            "sgd-regressor", 1, loss="epsilon-insensitive", hyperparams=NO_PENALTY
        )
        m = learn_online(m, (2.0,), 1.0)
        assert m.weights[0, 0] == pytest.approx(0.02)
        assert m.intercepts[0] == pytest.approx(0.01)

    def test_regressor_squared_epsilon_step(self):
        m = make_model(
            "sgd-regressor",
            1,
            loss="squared-epsilon-insensitive",
            hyperparams=NO_PENALTY,
        )
        m = learn_online(m, (1.0,), 2.0)
        assert m.weights[0, 0] == pytest.approx(0.038)
        assert m.intercepts[0] == pytest.approx(0.038)

    def test_elasticnet_decays_even_without_loss(self):
        # Craft scores far on the correct side so the hinge gradient is zero;
        # the penalty must still shrink every weight row, intercepts untouched.
        base = make_model(
            "sgd-classifier",
            2,
            classes=(0, 1),
            penalty="elasticnet",
            hyperparams=Hyperparams(eta=0.1, alpha=1.0),
        )
        record = serialize_model(base)
        record["weights"] = [[1.0, -2.0], [3.0, 4.0]]
        record["intercepts"] = [-5.0, 5.0]
        m = learn_online(deserialize_model(record), (0.0, 0.0), 1)
        assert np.allclose(m.weights, [[0.9, -1.815], [2.73, 3.645]])
        assert m.intercepts.tolist() == [-5.0, 5.0]

    def test_l1_penalty_applies_every_sample(self):
        hp = Hyperparams(eta=0.1, alpha=0.5)
        m = make_model("sgd-classifier", 1, classes=(0, 1), penalty="l1", hyperparams=hp)
        m = learn_online(m, (1.0,), 1)
        m = learn_online(m, (0.0,), 1)
        assert np.allclose(m.weights, [[-0.05], [0.05]])
        assert m.intercepts.tolist() == pytest.approx([-0.2, 0.2])


class TestInvariants:
    families = st.sampled_from(
        ["perceptron", "sgd-classifier", "pa-classifier", "sgd-regressor", "pa-regressor"]
    )

    @given(
        family=families,
        penalty=st.sampled_from(["none", "l1", "l2", "elasticnet"]),
        data=st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_silent_feature_keeps_zero_weight(self, family, penalty, data):
        is_classifier = family in ("perceptron", "sgd-classifier", "pa-classifier")
        m = make_model(
            family, 3, classes=(0, 1) if is_classifier else (), penalty=penalty
        )
        n = data.draw(st.integers(min_value=1, max_value=8))
        values = st.floats(min_value=-10, max_value=10, allow_nan=False)
        for _ in range(n):
            x = [data.draw(values), 0.0, data.draw(values)]
            target = data.draw(
                st.integers(0, 1) if is_classifier else st.floats(-5, 5)
            )
            m = learn_online(m, x, target)
        assert np.all(m.weights[:, 1] == 0.0)

    @given(
        family=families,
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=25, deadline=None)
    def test_batch_equals_sequential_singles(self, family, seed):
        rng = np.random.default_rng(seed)
        is_classifier = family in ("perceptron", "sgd-classifier", "pa-classifier")
        X = rng.normal(size=(6, 2))
        if is_classifier:
            targets = rng.integers(0, 3, size=6)
            m0 = make_model(family, 2, classes=(0, 1, 2))
        else:
            targets = rng.normal(size=6)
            m0 = make_model(family, 2)
        batched = learn_batch(m0, X, targets)
        stepped = m0
        for x, t in zip(X, targets):
            stepped = learn_online(stepped, x, t)
        assert np.array_equal(batched.weights, stepped.weights)
        assert np.array_equal(batched.intercepts, stepped.intercepts)
        assert batched.n_updates == stepped.n_updates == 6
        assert batched.seen_classes == stepped.seen_classes

    def test_updates_are_reproducible_and_nonmutating(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        targets = rng.integers(0, 2, size=40)
        m0 = make_model("sgd-classifier", 3, classes=(0, 1), penalty="elasticnet")
        a = learn_batch(m0, X, targets)
        b = learn_batch(m0, X, targets)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.intercepts, b.intercepts)
        assert not m0.weights.any(), "input snapshot must not be mutated"
        with pytest.raises(ValueError):
            a.weights[0, 0] = 99.0

    def test_empty_batch_is_identity(self):
        m = make_model("sgd-regressor", 2)
        out = learn_batch(m, np.empty((0, 2)), [])
        assert out is m


class TestColdStart:
    def test_classifier_cold_until_two_classes(self):
        m = make_model("perceptron", 2, classes=(3, 5, 7))
        assert m.cold
        assert predict(m, [(4.0, 4.0)]).tolist() == [3]
        m = learn_online(m, (1.0, 0.0), 5)
        assert m.cold
        assert predict(m, [(1.0, 0.0)]).tolist() == [3]
        m = learn_online(m, (0.0, 1.0), 7)
        assert not m.cold
        assert predict(m, [(1.0, 0.0)])[0] in (3, 5, 7)

    def test_regressor_cold_until_first_update(self):
        m = make_model("pa-regressor", 1)
        assert m.cold
        assert not learn_online(m, (1.0,), 5.0).cold


class TestConvergence:
    def test_pa_regressor_fits_linear_target(self):
        rng = np.random.default_rng(11)
        X = rng.uniform(-1.0, 1.0, size=(600, 2))
        y = 3.0 * X[:, 0] - 2.0 * X[:, 1] + 1.0
        m = make_model("pa-regressor", 2)
        m = learn_batch(m, X, y)
        holdout = rng.uniform(-1.0, 1.0, size=(100, 2))
        truth = 3.0 * holdout[:, 0] - 2.0 * holdout[:, 1] + 1.0
        pred = predict(m, holdout)
        ss_res = float(np.sum((truth - pred) ** 2))
        ss_tot = float(np.sum((truth - truth.mean()) ** 2))
        assert 1.0 - ss_res / ss_tot > 0.99

    def test_sgd_classifier_separates_blobs(self):
        rng = np.random.default_rng(13)
        n = 200
        X = np.vstack([
            rng.normal((-2.0, -2.0), 0.5, size=(n, 2)),
            rng.normal((2.0, 2.0), 0.5, size=(n, 2)),
        ])
        targets = np.repeat([0, 1], n)
        order = rng.permutation(2 * n)
        m = make_model("sgd-classifier", 2, classes=(0, 1))
        for _ in range(3):
            m = learn_batch(m, X[order], targets[order])
        assert np.mean(predict(m, X) == targets) > 0.99


class TestSerialization:
    def test_round_trip_preserves_behaviour(self, tmp_path):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 4))
        targets = rng.integers(0, 4, size=30)
        m = make_model("sgd-classifier", 4, classes=(0, 1, 2, 3), penalty="l2")
        m = learn_batch(m, X, targets)
        path = tmp_path / "model.json"
        save_model(m, path)
        back = load_model(path)
        assert np.array_equal(back.weights, m.weights)
        assert np.array_equal(back.intercepts, m.intercepts)
        assert back.seen_classes == m.seen_classes
        assert back.n_updates == m.n_updates
        assert (back.family, back.loss, back.penalty) == (m.family, m.loss, m.penalty)
        probe = rng.normal(size=(10, 4))
        assert np.array_equal(predict(back, probe), predict(m, probe))
        more_a = learn_batch(m, X, targets)
        more_b = learn_batch(back, X, targets)
        assert np.array_equal(more_a.weights, more_b.weights)

    def test_missing_field_is_an_error(self):
        record = serialize_model(make_model("pa-regressor", 2))
        del record["weights"]
        with pytest.raises(LearnerError):
            deserialize_model(record)


class TestValidation:
    def test_rejects_unknown_family(self):
        with pytest.raises(LearnerError):
            make_model("gradient-boost", 2, classes=(0, 1))

    def test_rejects_single_class(self):
        with pytest.raises(LearnerError):
            make_model("perceptron", 2, classes=(1,))

    def test_rejects_duplicate_classes(self):
        with pytest.raises(LearnerError):
            make_model("perceptron", 2, classes=(1, 1))

    def test_rejects_classes_on_regressor(self):
        with pytest.raises(LearnerError):
            make_model("sgd-regressor", 2, classes=(0, 1))

    def test_rejects_mismatched_losses(self):
        with pytest.raises(LearnerError):
            make_model("sgd-classifier", 2, classes=(0, 1), loss="epsilon-insensitive")
        with pytest.raises(LearnerError):
            make_model("sgd-regressor", 2, loss="hinge")
        with pytest.raises(LearnerError):
            make_model("pa-regressor", 2, loss="squared")
        with pytest.raises(LearnerError):
            make_model("pa-classifier", 2, classes=(0, 1), loss="log")

    def test_rejects_unknown_label_and_bad_shapes(self):
        m = make_model("perceptron", 2, classes=(0, 1))
        with pytest.raises(LearnerError):
            learn_online(m, (1.0, 0.0), 9)
        with pytest.raises(LearnerError):
            learn_online(m, (1.0,), 1)
        with pytest.raises(LearnerError):
            learn_online(make_model("sgd-regressor", 1), (1.0,), float("nan"))
        with pytest.raises(LearnerError):
            predict(m, [(1.0, 2.0, 3.0)])

    def test_rejects_bad_hyperparams(self):
        with pytest.raises(LearnerError):
            Hyperparams(eta=0.0)
        with pytest.raises(LearnerError):
            Hyperparams(cap_c=-1.0)
        with pytest.raises(LearnerError):
            Hyperparams(alpha=float("inf"))
