import logging

import numpy as np
import pytest

from mfsrbf.config import SrbfConfig
from mfsrbf.errors import DuplicatePointError, InvalidArgumentError
from mfsrbf.logic import srbf
from mfsrbf.logic.srbf import RbfEnsemble, TrainingSet


class TestTrainingSet:
    """Validation and functional updates of training sets."""

    def test_flat_points_are_one_dimensional(self):
        t = TrainingSet([0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
        assert t.points.shape == (3, 1)
        assert t.size == 3 and t.dim == 1

    def test_rejects_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            TrainingSet([[0.0], [1.0]], [1.0])

    def test_rejects_points_outside_unit_cube(self):
        with pytest.raises(InvalidArgumentError):
            TrainingSet([[0.0], [1.5]], [1.0, 2.0])

    def test_rejects_duplicates(self):
        with pytest.raises(DuplicatePointError):
            TrainingSet([[0.2], [0.2]], [1.0, 2.0])

    def test_append_returns_new_set(self):
        t = TrainingSet([0.0, 1.0], [0.0, 1.0])
        t2 = t.append([0.5], 0.25)
        assert t.size == 2
        assert t2.size == 3
        np.testing.assert_array_equal(t2.points[-1], [0.5])

    def test_append_duplicate_raises(self):
        t = TrainingSet([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(DuplicatePointError):
            t.append([1.0], 3.0)

    def test_without_drops_one_point(self):
        t = TrainingSet([0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(t.without(1).values, [1.0, 3.0])

    def test_fingerprint_tracks_content(self):
        a = TrainingSet([0.0, 1.0], [0.0, 1.0])
        b = TrainingSet([0.0, 1.0], [0.0, 1.0])
        c = TrainingSet([0.0, 1.0], [0.0, 2.0])
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != c.fingerprint()
        assert a.fingerprint().startswith("2:")

    def test_arrays_are_read_only(self):
        t = TrainingSet([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            t.values[0] = 5.0

    def test_dict_round_trip_keeps_empty_shape(self):
        t = TrainingSet.empty(3)
        back = TrainingSet.from_dict(t.to_dict(), dim=3)
        assert back.points.shape == (0, 3)


class TestStratifiedTaus:
    def test_five_midpoints(self):
        np.testing.assert_allclose(srbf.stratified_taus(5), [1.2, 1.6, 2.0, 2.4, 2.8])

    def test_single_sample_is_two(self):
        np.testing.assert_allclose(srbf.stratified_taus(1), [2.0])

    def test_default_ensemble_stays_in_range(self):
        taus = srbf.stratified_taus(100)
        assert taus.min() > 1.0 and taus.max() < 3.0
        assert len(taus) == 100


class TestKmeans:
    """Deterministic k-means center placement."""

    def test_k_equal_j_returns_points(self):
        np.testing.assert_allclose(srbf.kmeans_centers([0.0, 0.5, 1.0], 3), [[0.0], [0.5], [1.0]])

    def test_two_clusters(self):
        centers = srbf.kmeans_centers([0.0, 0.1, 0.9, 1.0], 2)
        np.testing.assert_allclose(np.sort(centers.ravel()), [0.05, 0.95])

    def test_single_point(self):
        np.testing.assert_allclose(srbf.kmeans_centers([[0.3, 0.7]], 1), [[0.3, 0.7]])

    def test_invalid_k(self):
        with pytest.raises(InvalidArgumentError):
            srbf.kmeans_centers([0.0, 1.0], 3)
        with pytest.raises(InvalidArgumentError):
            srbf.kmeans_centers([0.0, 1.0], 0)

    def test_order_independent(self):
        rng = np.random.default_rng(3)
        pts = rng.random((12, 2))
        a = srbf.kmeans_centers(pts, 4)
        b = srbf.kmeans_centers(pts[::-1], 4)
        np.testing.assert_array_equal(a, b)

    def test_seed_does_not_change_result(self):
        pts = np.random.default_rng(5).random((10, 2))
        np.testing.assert_array_equal(srbf.kmeans_centers(pts, 3, seed=0), srbf.kmeans_centers(pts, 3, seed=99))

    def test_centers_inside_bounding_box(self):
        pts = np.random.default_rng(11).random((15, 3))
        centers = srbf.kmeans_centers(pts, 5)
        assert np.all(centers >= pts.min(axis=0) - 1e-15)
        assert np.all(centers <= pts.max(axis=0) + 1e-15)


class TestFitWeights:
    """Least-squares weights for a single tau."""

    def test_two_point_system(self):
        t = TrainingSet([[0.0], [1.0]], [0.0, 2.0])
        w, truncated = srbf.fit_weights(t, [[0.0], [1.0]], 1.0)
        np.testing.assert_allclose(w, [2.0, 0.0], atol=1e-12)
        assert not truncated

    def test_zero_values_give_zero_weights(self):
        t = TrainingSet([0.0, 0.4, 1.0], [0.0, 0.0, 0.0])
        w, _ = srbf.fit_weights(t, [[0.0], [1.0]], 1.5)
        np.testing.assert_allclose(w, 0.0, atol=1e-15)

    def test_single_center_normal_equation(self):
        t = TrainingSet([0.0, 0.5, 1.0], [1.0, 1.0, 1.0])
        w, _ = srbf.fit_weights(t, [[0.5]], 2.0)
        np.testing.assert_allclose(w, [4.0], rtol=1e-12)

    def test_rejects_tau_out_of_range(self):
        t = TrainingSet([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(InvalidArgumentError):
            srbf.fit_weights(t, [[0.0]], 3.5)

    def test_rejects_more_centers_than_points(self):
        t = TrainingSet([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(InvalidArgumentError):
            srbf.fit_weights(t, [[0.0], [0.5], [1.0]], 2.0)

    def test_rank_deficient_system_is_flagged(self):
        # tau = 2 in one dimension spans at most three functions
        x = np.linspace(0.0, 1.0, 6)
        t = TrainingSet(x, np.sin(4.0 * x))
        w, truncated = srbf.fit_weights(t, x.reshape(-1, 1), 2.0)
        assert truncated
        assert np.all(np.isfinite(w))

    def test_matches_normal_equations(self):
        # ill-conditioned draws are resampled; the normal equations lose accuracy there
        rng = np.random.default_rng(2024)
        checked = attempts = 0
        while checked < 100 and attempts < 10_000:
            attempts += 1
            J = int(rng.integers(3, 9))
            K = int(rng.integers(1, J + 1))
            tau = float(rng.uniform(1.0, 3.0))
            pts = rng.random((J, 2))
            centers = pts[:K]
            A = srbf.design_matrix(pts, centers, tau)
            if np.linalg.cond(A) > 1e3:
                continue
            t = TrainingSet(pts, rng.normal(size=J))
            w_ref = np.linalg.solve(A.T @ A, A.T @ t.values)
            w, _ = srbf.fit_weights(t, centers, tau)
            np.testing.assert_allclose(w, w_ref, rtol=1e-8, atol=1e-8 * np.linalg.norm(w_ref))
            checked += 1
        assert checked == 100


class TestEnsemble:
    def test_structure(self):
        x = np.linspace(0.0, 1.0, 6)
        model = srbf.fit_ensemble(TrainingSet(x, np.cos(5.0 * x)), 3)
        assert model.kstar == 3
        assert model.centers.shape == (3, 1)
        assert model.weights.shape == (100, 3)
        assert np.all((model.tau_samples >= 1.0) & (model.tau_samples <= 3.0))

    def test_interpolation_with_all_centers(self):
        x = np.linspace(0.0, 1.0, 5)
        values = 1.0 + x + x**2
        model = srbf.fit_ensemble(TrainingSet(x, values), 5)
        members = srbf.member_values(model, x.reshape(-1, 1))
        np.testing.assert_allclose(members, np.broadcast_to(values, members.shape), rtol=1e-8)

    def test_interpolation_has_no_band_at_training_points(self):
        x = np.linspace(0.0, 1.0, 5)
        model = srbf.fit_ensemble(TrainingSet(x, 2.0 + x), 5)
        _, unc = srbf.predict_many(model, x)
        assert np.all(unc < 1e-8)

    def test_fit_is_deterministic(self, smooth_1d):
        a = srbf.fit_ensemble(smooth_1d, 4)
        b = srbf.fit_ensemble(smooth_1d, 4)
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.centers, b.centers)
        assert a.training_fingerprint == b.training_fingerprint

    def test_dict_round_trip(self, smooth_1d):
        model = srbf.fit_ensemble(smooth_1d, 4)
        back = RbfEnsemble.from_dict(model.to_dict())
        np.testing.assert_array_equal(back.weights, model.weights)
        assert back.kstar == 4


class TestPredict:
    """Ensemble mean and percentile band."""

    def test_percentile_band(self):
        model = RbfEnsemble([[0.0]], [1.0, 1.0, 1.0, 1.0], [[1.0], [2.0], [3.0], [4.0]], "manual")
        p = srbf.predict(model, [1.0])
        assert p.mean == pytest.approx(2.5)
        # linear percentiles of {1, 2, 3, 4}: 1.075 and 3.925
        assert p.uncertainty == pytest.approx((3.925 - 1.075) / 2.0)

    def test_distinct_exponents_spread_away_from_center(self):
        taus = srbf.stratified_taus(100)
        model = RbfEnsemble([[0.5]], taus, np.ones((100, 1)), "manual")
        assert srbf.predict(model, [0.9]).uncertainty > 0.0
        assert srbf.predict(model, [0.5]).uncertainty == 0.0

    def test_uncertainty_non_negative(self, line_samples):
        model = srbf.fit_ensemble(line_samples, 6)
        _, unc = srbf.predict_many(model, np.linspace(0.0, 1.0, 301))
        assert np.all(unc >= 0.0)

    def test_predict_matches_predict_many(self, smooth_1d):
        model = srbf.fit_ensemble(smooth_1d, 5)
        X = np.linspace(0.0, 1.0, 7)
        mean, unc = srbf.predict_many(model, X)
        for i, x in enumerate(X):
            p = srbf.predict(model, [x])
            assert p.mean == pytest.approx(mean[i], rel=1e-12, abs=1e-12)
            assert p.uncertainty == pytest.approx(unc[i], rel=1e-12, abs=1e-12)

    def test_chunking_does_not_change_results(self, smooth_1d):
        model = srbf.fit_ensemble(smooth_1d, 5)
        X = np.linspace(0.0, 1.0, 600)
        mean, _ = srbf.predict_many(model, X)
        mean_head, _ = srbf.predict_many(model, X[:10])
        np.testing.assert_allclose(mean[:10], mean_head, rtol=1e-13)


class TestLoocv:
    def test_outlier_gives_positive_rmse(self):
        x = np.linspace(0.0, 1.0, 6)
        values = 2.0 * x
        values[3] += 5.0
        assert srbf.loocv_rmse(TrainingSet(x, values), 3) > 0.0

    def test_permutation_invariant(self, smooth_1d):
        perm = np.random.default_rng(1).permutation(smooth_1d.size)
        shuffled = TrainingSet(smooth_1d.points[perm], smooth_1d.values[perm])
        assert srbf.loocv_rmse(shuffled, 3) == pytest.approx(srbf.loocv_rmse(smooth_1d, 3), rel=1e-10)

    def test_requires_three_points(self):
        with pytest.raises(InvalidArgumentError):
            srbf.loocv_rmse(TrainingSet([0.0, 1.0], [0.0, 1.0]), 1)

    def test_rejects_k_of_j(self, smooth_1d):
        with pytest.raises(InvalidArgumentError):
            srbf.loocv_rmse(smooth_1d, smooth_1d.size)


class TestSelectNumCenters:
    """LOOCV search for K*."""

    def test_three_points_single_candidate(self):
        assert srbf.select_num_centers(TrainingSet([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])) == 2

    def test_degenerate_bootstrap(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert srbf.select_num_centers(TrainingSet([0.0, 1.0], [0.0, 1.0])) == 1
        assert "without LOOCV" in caplog.text
        assert srbf.select_num_centers(TrainingSet([0.3], [1.0])) == 1

    def test_window_around_previous(self, monkeypatch):
        seen = []

        def fake_rmse(train, K, config=None):
            seen.append(K)
            return 1.0

        monkeypatch.setattr(srbf, "loocv_rmse", fake_rmse)
        train = TrainingSet(np.linspace(0.0, 1.0, 12), np.zeros(12))
        assert srbf.select_num_centers(train, prev_kstar=5) == 4
        assert seen == [4, 5, 6]

    def test_window_clamped_to_range(self, monkeypatch):
        seen = []
        monkeypatch.setattr(srbf, "loocv_rmse", lambda train, K, config=None: seen.append(K) or 1.0)
        train = TrainingSet(np.linspace(0.0, 1.0, 6), np.zeros(6))
        srbf.select_num_centers(train, prev_kstar=5)
        assert seen == [4, 5]

    def test_ties_go_to_smaller_k(self, monkeypatch):
        monkeypatch.setattr(srbf, "loocv_rmse", lambda train, K, config=None: 0.5 if K in (3, 5) else 1.0)
        train = TrainingSet(np.linspace(0.0, 1.0, 8), np.zeros(8))
        assert srbf.select_num_centers(train) == 3

    def test_selected_k_is_argmin(self, smooth_1d):
        config = SrbfConfig()
        k_star = srbf.select_num_centers(smooth_1d, None, config)
        rmses = {k: srbf.loocv_rmse(smooth_1d, k, config) for k in range(2, smooth_1d.size)}
        assert rmses[k_star] == min(rmses.values())

    @pytest.mark.slow
    def test_noise_is_smoothed(self):
        x = np.linspace(0.0, 1.0, 20)
        below = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            train = TrainingSet(x, 2.0 * x - 1.0 + 0.1 * rng.standard_normal(x.size))
            if srbf.select_num_centers(train) < x.size - 1:
                below += 1
        assert below >= 40

    @pytest.mark.slow
    def test_selected_fit_is_no_worse_than_interpolation(self):
        x = np.linspace(0.0, 1.0, 20)
        held_out = 0.5 * (x[1:] + x[:-1])
        truth = 2.0 * held_out - 1.0
        gaps = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            train = TrainingSet(x, 2.0 * x - 1.0 + 0.1 * rng.standard_normal(x.size))
            errors = []
            for K in (srbf.select_num_centers(train), x.size - 1):
                mean, _ = srbf.predict_many(srbf.fit_ensemble(train, K), held_out)
                errors.append(np.sqrt(np.mean((mean - truth) ** 2)))
            gaps.append(errors[0] - errors[1])
        # one-sided: the 5th percentile of the bootstrapped mean gap must not exceed zero
        rng = np.random.default_rng(0)
        gaps = np.asarray(gaps)
        means = gaps[rng.integers(0, gaps.size, size=(2000, gaps.size))].mean(axis=1)
        assert np.percentile(means, 5) <= 0.0
