import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from bernwass.datasets import Dataset
from bernwass.errors import ConfigError, EmptyData
from bernwass.metrics import (
    MetricsReport,
    avg_w2,
    energy_distance,
    evaluate,
    model_energy_distance,
    nll,
    rmse,
    sample_predictive,
    sri,
)
from bernwass.model import MixtureModel, ParamLayout, unflatten_params


def constant_model(means, var, logits=None, jitter=1e-6):
    """Model whose component k sits at ``means[k]`` with covariance ``var * I`` for all t."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    k, d = means.shape
    lower = math.sqrt(var - jitter) * np.eye(d)
    return MixtureModel(
        np.repeat(means[:, None, :], 2, axis=1),
        np.tile(lower, (k, 2, 1, 1)),
        np.zeros(k) if logits is None else logits,
        jitter=jitter,
    )


def exact_fit(data, eps=1e-3):
    """Degree-1 model through two points with covariance eps I everywhere."""
    means = np.stack([data.ys[0], data.ys[-1]])[None]
    lower = math.sqrt(eps - 1e-4) * np.eye(data.dim)
    return MixtureModel(means, np.tile(lower, (1, 2, 1, 1)), np.zeros(1), jitter=1e-4)


def two_point_line():
    xs = np.linspace(0.0, 1.0, 11)
    return Dataset(xs, np.column_stack([xs, 1 - 2 * xs]), name="line")


def brute_energy(x, y):
    def mean_dist(a, b, skip_diag):
        total, count = 0.0, 0
        for i in range(len(a)):
            for j in range(len(b)):
                if skip_diag and i == j:
                    continue
                total += math.dist(a[i], b[j])
                count += 1
        return total / count if count else 0.0

    return 2 * mean_dist(x, y, False) - mean_dist(x, x, True) - mean_dist(y, y, True)


class TestAvgW2:
    def test_exact_fit_is_zero(self):
        data = two_point_line()
        assert avg_w2(exact_fit(data), data, 1e-3) == pytest.approx(0.0, abs=1e-12)

    def test_scalar_example(self):
        m = constant_model([[0.0]], 4.0)
        data = Dataset([0.0, 1.0], [[1.0], [1.0]])
        assert avg_w2(m, data, eps=1.0) == pytest.approx(math.sqrt(2.0), rel=1e-10)

    def test_halving_errors_decreases(self):
        data = Dataset(np.linspace(0, 1, 5), np.zeros((5, 2)))
        far = constant_model([[0.4, -0.2]], 0.01)
        near = constant_model([[0.2, -0.1]], 0.01)
        assert avg_w2(near, data) < avg_w2(far, data)

    def test_positive_for_imperfect(self):
        data = two_point_line()
        assert avg_w2(constant_model([[0.0, 0.0]], 0.01), data) > 0

    def test_empty(self):
        with pytest.raises(EmptyData):
            avg_w2(constant_model([[0.0]], 1.0), Dataset(np.zeros(0), np.zeros((0, 1))))


class TestEnergyDistance:
    def test_identical_sets(self, rng):
        x = rng.standard_normal((30, 2))
        assert energy_distance(x, x) == 0.0

    def test_singletons(self):
        assert energy_distance([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(10.0)

    def test_matches_brute_force(self, rng):
        for _ in range(10):
            x = rng.standard_normal((int(rng.integers(1, 15)), 3))
            y = rng.standard_normal((int(rng.integers(1, 15)), 3)) + rng.uniform(0, 2)
            assert energy_distance(x, y) == pytest.approx(max(brute_energy(x, y), 0.0), abs=1e-12)

    def test_symmetric_and_nonnegative(self, rng):
        for _ in range(100):
            x = rng.standard_normal((8, 2))
            y = rng.standard_normal((6, 2)) * rng.uniform(0.5, 2)
            a, b = energy_distance(x, y), energy_distance(y, x)
            assert a >= 0
            assert a == pytest.approx(b, abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyData):
            energy_distance(np.zeros((0, 2)), [[1.0, 1.0]])

    def test_model_samples_are_seeded(self):
        data = two_point_line()
        m = constant_model([[0.0, 0.0], [1.0, 1.0]], 0.05, logits=np.array([0.0, 1.0]))
        a = model_energy_distance(m, data, np.random.default_rng(5))
        b = model_energy_distance(m, data, np.random.default_rng(5))
        assert a == b

    def test_predictive_samples_follow_mixture(self):
        m = constant_model([[0.0, 0.0], [10.0, 0.0]], 0.25, logits=np.log([0.3, 0.7]))
        draws = sample_predictive(m, np.full(20_000, 0.5), np.random.default_rng(0))
        frac = np.mean(draws[:, 0] > 5)
        assert frac == pytest.approx(0.7, abs=0.02)
        np.testing.assert_allclose(draws[draws[:, 0] < 5].std(axis=0), 0.5, rtol=0.05)


class TestNll:
    def test_unit_density_at_mode(self):
        m = constant_model([[0.0]], 1.0 / (2 * math.pi))
        data = Dataset([0.0, 1.0], [[0.0], [0.0]])
        assert nll(m, data) == pytest.approx(0.0, abs=1e-12)

    def test_standard_normal_at_mode(self):
        m = constant_model([[2.0]], 1.0)
        data = Dataset([0.0, 1.0], [[2.0], [2.0]])
        assert nll(m, data) == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_identical_components_collapse(self):
        data = two_point_line()
        one = constant_model([[0.1, 0.2]], 0.3)
        two = constant_model([[0.1, 0.2], [0.1, 0.2]], 0.3, logits=np.array([0.4, -1.0]))
        assert nll(two, data) == pytest.approx(nll(one, data), rel=1e-12)

    def test_matches_scipy(self, rng):
        layout = ParamLayout(3, 3, 2)
        m = unflatten_params(rng.standard_normal(layout.size), layout, jitter=1e-3)
        data = Dataset(np.linspace(0, 1, 9), rng.standard_normal((9, 2)))
        pred = m.predict(data.xs)
        dens = [
            sum(w * multivariate_normal(pred.means[i, k], pred.covs[i, k]).pdf(data.ys[i]) for k, w in enumerate(pred.weights))
            for i in range(9)
        ]
        assert nll(m, data) == pytest.approx(-np.mean(np.log(dens)), rel=1e-10)

    def test_far_points_stay_finite(self):
        m = constant_model([[0.0, 0.0], [1.0, 0.0]], 1e-4)
        data = Dataset([0.0, 1.0], [[50.0, 50.0], [60.0, -50.0]])
        assert np.isfinite(nll(m, data))

    def test_moving_mean_toward_data_helps(self):
        data = Dataset(np.linspace(0, 1, 4), np.ones((4, 2)))
        assert nll(constant_model([[0.8, 0.8]], 0.1), data) < nll(constant_model([[0.2, 0.2]], 0.1), data)


class TestRmse:
    def test_exact_fit(self):
        data = two_point_line()
        assert rmse(exact_fit(data), data) == pytest.approx(0.0, abs=1e-14)

    def test_constant_offset(self):
        data = two_point_line()
        shifted = Dataset(data.xs, data.ys + np.array([0.3, -0.4]))
        assert rmse(exact_fit(data), shifted) == pytest.approx(0.5, rel=1e-12)

    def test_single_point(self):
        data = Dataset([0.0, 1.0], [[3.0, 4.0], [3.0, 4.0]])
        assert rmse(constant_model([[0.0, 0.0]], 1.0), data) == pytest.approx(5.0)

    def test_matches_naive_loop(self, rng):
        layout = ParamLayout(4, 2, 3)
        m = unflatten_params(rng.standard_normal(layout.size), layout)
        data = Dataset(np.linspace(0, 1, 17), rng.standard_normal((17, 3)))
        sq = 0.0
        for x, y in zip(data.xs, data.ys):
            w, means, _ = m.predict_at(x)
            yhat = sum(wk * mk for wk, mk in zip(w, means))
            sq += sum((a - b) ** 2 for a, b in zip(yhat, y))
        assert rmse(m, data) == pytest.approx(math.sqrt(sq / 17), abs=1e-12)


class TestSri:
    def line_model(self):
        return MixtureModel([[[0.0, 1.0], [2.0, -3.0]]], np.zeros((1, 2, 2, 2)), np.zeros(1))

    def parabola_model(self):
        # Bernstein controls of (t^2, 0): (0,0), (0,0), (1,0)
        return MixtureModel([[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]], np.zeros((1, 3, 2, 2)), np.zeros(1))

    def test_straight_line(self):
        assert sri(self.line_model(), 500) < 1e-10

    def test_parabola(self):
        assert sri(self.parabola_model(), 1000) == pytest.approx(4.0, rel=0.01)

    def test_grid_doubling(self, rng):
        layout = ParamLayout(6, 1, 2)
        m = unflatten_params(rng.standard_normal(layout.size), layout)
        assert sri(m, 800) == pytest.approx(sri(m, 400), rel=0.02)

    def test_grid_too_small(self):
        with pytest.raises(ConfigError):
            sri(self.line_model(), 2)


class TestReport:
    def test_evaluate_exact_fit(self):
        data = two_point_line()
        report = evaluate(exact_fit(data), data, model_name="exact")
        assert report.w2_bar == pytest.approx(0.0, abs=1e-12)
        assert report.rmse == pytest.approx(0.0, abs=1e-14)
        assert report.model_name == "exact" and report.dataset_name == "line"

    def test_deterministic_serialization(self):
        data = two_point_line()
        m = constant_model([[0.5, 0.5]], 0.2)
        a, b = evaluate(m, data, seed=3), evaluate(m, data, seed=3)
        assert a.to_json() == b.to_json()
        assert a.csv_row() == b.csv_row()
        assert MetricsReport.csv_header() == "model,dataset,w2_bar,energy_distance,nll,rmse,sri"
        assert len(a.csv_row().split(",")) == 7
