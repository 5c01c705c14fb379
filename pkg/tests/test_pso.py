import numpy as np
import pytest

from mfsrbf.config import PsoConfig
from mfsrbf.errors import InvalidArgumentError, OptimizationError
from mfsrbf.logic import pso


def sphere(center):
    center = np.asarray(center, dtype=float)
    return lambda X: np.sum((X - center) ** 2, axis=1)


class TestHammersley:
    def test_one_dimensional_midpoints(self):
        np.testing.assert_allclose(pso.hammersley(2, 1).ravel(), [0.25, 0.75])

    def test_second_coordinate_is_base_two_radical_inverse(self):
        pts = pso.hammersley(4, 2)
        np.testing.assert_allclose(pts[:, 0], [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(pts[:, 1], [0.5, 0.25, 0.75, 0.125])

    def test_radical_inverse(self):
        assert pso.radical_inverse(1, 3) == pytest.approx(1.0 / 3.0)
        assert pso.radical_inverse(5, 3) == pytest.approx(2.0 / 3.0 + 1.0 / 9.0)
        assert pso.radical_inverse(0, 2) == 0.0

    def test_points_inside_unit_box(self):
        pts = pso.hammersley(40, 10)
        assert pts.shape == (40, 10)
        assert np.all((pts >= 0.0) & (pts < 1.0))
        assert len(np.unique(pts, axis=0)) == 40

    def test_invalid_sizes(self):
        with pytest.raises(InvalidArgumentError):
            pso.hammersley(0, 2)


class TestInitSwarm:
    def test_default_swarm_size(self):
        x, v = pso.init_swarm(5)
        assert x.shape == (20, 5)
        assert not v.any()

    def test_explicit_swarm_size(self):
        x, _ = pso.init_swarm(2, PsoConfig(n_particles=11))
        assert len(x) == 11


class TestMinimize:
    def test_sphere(self):
        result = pso.minimize(sphere([0.3, 0.3]), 2)
        np.testing.assert_allclose(result.x_best, [0.3, 0.3], atol=1e-3)

    def test_runs_are_identical(self):
        f = lambda X: np.sin(7.0 * X[:, 0]) * np.cos(5.0 * X[:, 1]) + X[:, 0]
        a = pso.minimize(f, 2)
        b = pso.minimize(f, 2)
        np.testing.assert_array_equal(a.x_best, b.x_best)
        np.testing.assert_array_equal(a.history, b.history)

    def test_constant_objective_keeps_first_particle(self):
        result = pso.minimize(lambda X: np.full(len(X), 3.0), 2)
        np.testing.assert_array_equal(result.x_best, pso.init_swarm(2)[0][0])
        assert result.f_best == 3.0
        assert np.all(result.history == 3.0)

    def test_deeper_basin_wins(self):
        def bimodal(X):
            x = X[:, 0]
            return np.minimum((x - 0.2) ** 2, (x - 0.8) ** 2 - 0.5)

        result = pso.minimize(bimodal, 1)
        assert result.x_best[0] > 0.5
        assert result.f_best < -0.49

    def test_history_is_monotone(self):
        config = PsoConfig(n_iterations=50)
        result = pso.minimize(sphere([0.9, 0.1, 0.5]), 3, config)
        assert len(result.history) == 51
        assert np.all(np.diff(result.history) <= 0.0)
        assert result.history[-1] == result.f_best

    def test_zero_iterations_returns_best_initial_particle(self):
        config = PsoConfig(n_iterations=0)
        f = sphere([0.3])
        result = pso.minimize(f, 1, config)
        x0, _ = pso.init_swarm(1, config)
        assert result.f_best == f(x0).min()
        assert len(result.history) == 1

    def test_stays_in_the_box(self):
        seen = []

        def downhill(X):
            seen.append(X.copy())
            return X.sum(axis=1)

        result = pso.minimize(downhill, 3)
        seen = np.vstack(seen)
        assert np.all((seen >= 0.0) & (seen <= 1.0))
        assert np.all((result.x_best >= 0.0) & (result.x_best <= 1.0))
        assert result.f_best < 0.05

    def test_non_finite_values_count_as_infinite(self):
        def half_nan(X):
            f = (X[:, 0] - 0.7) ** 2
            return np.where(X[:, 0] < 0.5, np.nan, f)

        result = pso.minimize(half_nan, 1)
        assert result.n_nonfinite > 0
        assert result.x_best[0] >= 0.5
        assert np.isfinite(result.f_best)

    def test_all_non_finite_raises(self):
        with pytest.raises(OptimizationError):
            pso.minimize(lambda X: np.full(len(X), np.nan), 2, PsoConfig(n_iterations=5))

    def test_objective_shape_checked(self):
        with pytest.raises(InvalidArgumentError):
            pso.minimize(lambda X: np.zeros(len(X) + 1), 2)
