import numpy as np
import pytest

from adaspace.verifier import (
    QualityModel,
    VerifierError,
    check_coverage,
    verify,
)


def linear_model(index, name, scale, noise_std=0.0, cost_ms=0.0):
    return QualityModel(
        quality_index=index,
        name=name,
        estimator=lambda ids, state: scale * np.asarray(ids, dtype=np.float64),
        noise_std=noise_std,
        cost_ms=cost_ms,
    )


class TestExactness:
    def test_zero_noise_returns_ground_truth(self):
        models = [linear_model(0, "loss", 2.0), linear_model(1, "energy", -0.5)]
        result = verify([3, 1, 4], state=None, models=models, seed=7)
        assert np.array_equal(result.option_ids, [3, 1, 4])
        assert np.array_equal(result.qualities[:, 0], [6.0, 2.0, 8.0])
        assert np.array_equal(result.qualities[:, 1], [-1.5, -0.5, -2.0])

    def test_estimator_receives_state(self):
        captured = []

        def estimator(ids, state):
            captured.append(state)
            return np.zeros(len(ids))

        model = QualityModel(quality_index=0, name="q", estimator=estimator)
        verify([0], state={"snr": 4}, models=[model], seed=0)
        assert captured == [{"snr": 4}]

    def test_columns_follow_quality_index_not_list_order(self):
        models = [linear_model(1, "b", 10.0), linear_model(0, "a", 1.0)]
        result = verify([2], state=None, models=models, seed=0)
        assert result.qualities[0, 0] == 2.0
        assert result.qualities[0, 1] == 20.0


class TestNoise:
    def test_same_seed_same_result(self):
        models = [linear_model(0, "q", 1.0, noise_std=0.8)]
        a = verify([5, 6, 7], None, models, seed=42)
        b = verify([5, 6, 7], None, models, seed=42)
        assert np.array_equal(a.qualities, b.qualities)

    def test_different_seed_differs(self):
        models = [linear_model(0, "q", 1.0, noise_std=0.8)]
        a = verify([5, 6, 7], None, models, seed=1)
        b = verify([5, 6, 7], None, models, seed=2)
        assert not np.array_equal(a.qualities, b.qualities)

    def test_noise_statistics(self):
        n = 10_000
        models = [linear_model(0, "q", 0.0, noise_std=2.0)]
        result = verify(np.arange(n), None, models, seed=3)
        noise = result.qualities[:, 0]
        assert abs(noise.mean()) < 0.1
        assert noise.std() == pytest.approx(2.0, rel=0.05)

    def test_noise_independent_across_qualities(self):
        n = 10_000
        models = [
            linear_model(0, "a", 0.0, noise_std=1.0),
            linear_model(1, "b", 0.0, noise_std=1.0),
        ]
        result = verify(np.arange(n), None, models, seed=11)
        corr = np.corrcoef(result.qualities[:, 0], result.qualities[:, 1])[0, 1]
        assert abs(corr) < 0.05


class TestTiming:
    def test_simulated_time_is_cost_times_options(self):
        models = [
            linear_model(0, "loss", 1.0, cost_ms=40.0),
            linear_model(1, "latency", 1.0, cost_ms=30.0),
            linear_model(2, "energy", 1.0, cost_ms=30.0),
        ]
        result = verify(np.arange(216), None, models, seed=0)
        assert result.simulated_ms == pytest.approx(21_600.0)

    def test_simulated_time_linear_with_zero_intercept(self):
        models = [linear_model(0, "q", 1.0, cost_ms=12.5)]
        times = [
            verify(np.arange(k), None, models, seed=0).simulated_ms
            for k in (1, 4, 32)
        ]
        assert times == [12.5, 50.0, 400.0]

    def test_real_time_nonnegative(self):
        models = [linear_model(0, "q", 1.0)]
        result = verify([0, 1], None, models, seed=0)
        assert result.real_ms >= 0.0


class TestValidation:
    def test_coverage_reports_missing_indices(self):
        models = [linear_model(0, "a", 1.0), linear_model(2, "c", 1.0)]
        check_coverage(models, [0, 2])
        with pytest.raises(VerifierError, match="1"):
            check_coverage(models, [0, 1, 2])

    def test_duplicate_quality_index_rejected(self):
        models = [linear_model(0, "a", 1.0), linear_model(0, "b", 1.0)]
        with pytest.raises(VerifierError, match="duplicate"):
            verify([0], None, models, seed=0)

    def test_empty_option_list_rejected(self):
        with pytest.raises(VerifierError, match="empty"):
            verify([], None, [linear_model(0, "a", 1.0)], seed=0)

    def test_duplicate_option_ids_rejected(self):
        with pytest.raises(VerifierError, match="duplicate"):
            verify([1, 1], None, [linear_model(0, "a", 1.0)], seed=0)

    def test_estimator_shape_mismatch_rejected(self):
        bad = QualityModel(
            quality_index=0,
            name="q",
            estimator=lambda ids, state: np.zeros(len(ids) + 1),
        )
        with pytest.raises(VerifierError, match="shape"):
            verify([0, 1], None, [bad], seed=0)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            QualityModel(
                quality_index=0,
                name="q",
                estimator=lambda ids, state: np.zeros(len(ids)),
                noise_std=-1.0,
            )

    def test_result_arrays_are_frozen(self):
        result = verify([0, 1], None, [linear_model(0, "q", 1.0)], seed=0)
        with pytest.raises(ValueError):
            result.qualities[0, 0] = 99.0

    def test_caller_array_not_frozen(self):
        ids = np.array([0, 1, 2])
        verify(ids, None, [linear_model(0, "q", 1.0)], seed=0)
        ids[0] = 5
        assert ids[0] == 5
