import numpy as np
import pytest

from wildriff.core import RegressionDataset
from wildriff.synth import ExperimentSpec, generate
from wildriff.trainers import (
    FourierRidgeSpec,
    MlpSpec,
    TrainerError,
    TreeSpec,
    _fourier_design,
    _half_space_frequencies,
    fourier_ridge_fit,
    make_trainer,
    mlp_fit,
    tree_fit,
)


def uniform_dataset(n, d=1, seed=0, fn=None, noise=0.0):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, 1, size=(n, d))
    ys = np.zeros(n) if fn is None else fn(xs)
    if noise:
        ys = ys + rng.normal(0, noise, size=n)
    return RegressionDataset(xs, ys)


class TestFourierRidge:
    def test_constant_data(self):
        ds = uniform_dataset(20, fn=lambda xs: np.full(xs.shape[0], 2.5))
        f = fourier_ridge_fit(ds, FourierRidgeSpec(N=4, lam=0.0))
        probe = np.linspace(0, 1, 17)[:, None]
        np.testing.assert_allclose(f.predict(probe), 2.5, atol=1e-10)

    def test_interpolation_when_overparametrized(self):
        # With at least as many features as points, lam=0 interpolates.
        ds = uniform_dataset(9, seed=1, fn=lambda xs: np.sin(7 * xs[:, 0]))
        f = fourier_ridge_fit(ds, FourierRidgeSpec(N=8, lam=0.0))  # 17 features
        mse = np.mean((f.predict(ds.xs) - ds.ys) ** 2)
        assert mse <= 1e-16 * max(1.0, float(np.mean(ds.ys ** 2)))

    def test_exp1_training_mse_window(self):
        # Training MSE sits at the noise-variance floor (sigma^2 = 0.04).
        mses = []
        for seed in range(5):
            ds, _ = generate(ExperimentSpec(id="exp1", n=1000, seed=seed))
            f = fourier_ridge_fit(ds, FourierRidgeSpec(N=8, lam=1e-6))
            mses.append(float(np.mean((f.predict(ds.xs) - ds.ys) ** 2)))
        assert all(0.03 <= m <= 0.05 for m in mses)

    def test_normal_equations_residual(self):
        ds, _ = generate(ExperimentSpec(id="exp1", n=400, seed=3))
        spec = FourierRidgeSpec(N=6, lam=1e-4)
        f = fourier_ridge_fit(ds, spec)
        coef = f.meta["coefficients"]
        freqs = f.meta["frequencies"]
        phi = _fourier_design(ds.xs, freqs)
        gram = phi.T @ phi / ds.n + spec.lam * np.eye(phi.shape[1])
        rhs = phi.T @ ds.ys / ds.n
        rel = np.linalg.norm(gram @ coef - rhs) / np.linalg.norm(rhs)
        assert rel <= 1e-10

    def test_feature_cap(self):
        ds = uniform_dataset(10, d=5)
        with pytest.raises(TrainerError):
            fourier_ridge_fit(ds, FourierRidgeSpec(N=8, max_features=1000))

    def test_half_space_frequency_count(self):
        for d in (1, 2):
            for N in (1, 2, 3):
                freqs = _half_space_frequencies(N, d)
                assert 1 + 2 * len(freqs) == (2 * N + 1) ** d

    def test_prediction_totality(self):
        ds, _ = generate(ExperimentSpec(id="exp1", n=200, seed=0))
        f = fourier_ridge_fit(ds, FourierRidgeSpec(N=8, lam=1e-6))
        probes = np.random.default_rng(0).uniform(0, 1, size=(10_000, 1))
        assert np.all(np.isfinite(f.predict(probes)))


class TestMlp:
    def test_zero_noise_linear_data(self):
        ds = uniform_dataset(120, seed=2, fn=lambda xs: 2.0 * xs[:, 0] - 0.5)
        f = mlp_fit(ds, MlpSpec(max_iter=200), seed=0)
        mse = float(np.mean((f.predict(ds.xs) - ds.ys) ** 2))
        assert mse < 1e-2

    def test_determinism_same_seed(self):
        ds, _ = generate(ExperimentSpec(id="exp1", n=150, seed=1))
        probe = np.random.default_rng(1).uniform(0, 1, size=(100, 1))
        a = mlp_fit(ds, MlpSpec(max_iter=60), seed=5).predict(probe)
        b = mlp_fit(ds, MlpSpec(max_iter=60), seed=5).predict(probe)
        np.testing.assert_array_equal(a, b)

    def test_seed_changes_fit(self):
        ds, _ = generate(ExperimentSpec(id="exp1", n=150, seed=1))
        probe = np.random.default_rng(1).uniform(0, 1, size=(50, 1))
        a = mlp_fit(ds, MlpSpec(max_iter=30), seed=5).predict(probe)
        b = mlp_fit(ds, MlpSpec(max_iter=30), seed=6).predict(probe)
        assert not np.array_equal(a, b)

    def test_exp1_holdout_mse(self):
        ds, truth = generate(ExperimentSpec(id="exp1", n=500, seed=4))
        f = mlp_fit(ds, MlpSpec(max_iter=300), seed=0)
        holdout = truth.covariate_sampler(2000, 99)
        noise = truth.noise_sampler(2000, 99)
        y_hold = truth.fstar.predict(holdout) + noise
        mse = float(np.mean((f.predict(holdout) - y_hold) ** 2))
        assert mse < 2 * 0.2 ** 2

    def test_gd_optimizer_runs(self):
        ds = uniform_dataset(60, seed=3, fn=lambda xs: xs[:, 0])
        f = mlp_fit(ds, MlpSpec(optimizer="gd", max_iter=200, learning_rate=0.05), seed=0)
        assert np.all(np.isfinite(f.predict(ds.xs)))

    def test_weights_exposed(self):
        ds = uniform_dataset(40, seed=0, fn=lambda xs: xs[:, 0])
        f = mlp_fit(ds, MlpSpec(widths=(8, 8), max_iter=20), seed=0)
        assert [w.shape for w in f.meta["weights"]] == [(1, 8), (8, 8), (8, 1)]

    def test_prediction_totality(self):
        ds, _ = generate(ExperimentSpec(id="exp3", n=150, seed=0))
        f = mlp_fit(ds, MlpSpec(max_iter=60), seed=0)
        probes = np.random.default_rng(2).uniform(0, 1, size=(10_000, 5))
        assert np.all(np.isfinite(f.predict(probes)))


class TestTree:
    def test_constant_y(self):
        ds = uniform_dataset(25, fn=lambda xs: np.full(xs.shape[0], -1.25))
        f = tree_fit(ds, TreeSpec(max_depth=4))
        np.testing.assert_allclose(f.predict(np.linspace(0, 1, 9)[:, None]), -1.25)

    def test_exp2_noiseless_recovery(self):
        ds, truth = generate(ExperimentSpec(id="exp2", n=200, seed=5, noise_scale=0.0))
        f = tree_fit(ds, TreeSpec(max_depth=2, min_samples_leaf=1))
        interior = np.array([[0.1], [0.5], [0.9]])
        np.testing.assert_allclose(f.predict(interior), [0.0, 1.0, 2.0], atol=1e-12)

    def test_deterministic(self):
        ds, _ = generate(ExperimentSpec(id="exp2", n=300, seed=8))
        probe = np.random.default_rng(0).uniform(0, 1, size=(200, 1))
        a = tree_fit(ds, TreeSpec(max_depth=6), seed=1).predict(probe)
        b = tree_fit(ds, TreeSpec(max_depth=6), seed=1).predict(probe)
        np.testing.assert_array_equal(a, b)

    def test_min_samples_leaf_respected(self):
        ds, _ = generate(ExperimentSpec(id="exp2", n=100, seed=2))
        f = tree_fit(ds, TreeSpec(max_depth=10, min_samples_leaf=20))
        # at most n / min_leaf leaves
        assert f.meta["n_leaves"] <= 5

    def test_forest_averages(self):
        ds, _ = generate(ExperimentSpec(id="exp3", n=200, seed=1))
        f = tree_fit(ds, TreeSpec(max_depth=4, n_trees=4, feature_fraction=0.6), seed=3)
        assert np.all(np.isfinite(f.predict(ds.xs)))

    def test_prediction_totality(self):
        ds, _ = generate(ExperimentSpec(id="exp2", n=500, seed=0))
        f = tree_fit(ds, TreeSpec(max_depth=6))
        probes = np.random.default_rng(1).uniform(0, 1, size=(10_000, 1))
        assert np.all(np.isfinite(f.predict(probes)))


class TestRegistry:
    def test_names(self):
        for name in ("fourier_ridge", "mlp", "tree"):
            oracle = make_trainer(name, {})
            assert oracle.name == name

    def test_unknown(self):
        with pytest.raises(TrainerError):
            make_trainer("boost", {})

    def test_params_forwarded(self):
        oracle = make_trainer("fourier_ridge", {"N": 3, "lam": 0.0})
        ds = uniform_dataset(30, fn=lambda xs: np.cos(2 * np.pi * xs[:, 0]))
        f = oracle.fit(ds, 0)
        assert f.meta["N"] == 3

    def test_seed_isolation_deterministic_trainers(self):
        # Seeds only matter for stochastic trainers; ridge and single trees
        # ignore them.
        ds, _ = generate(ExperimentSpec(id="exp1", n=120, seed=0))
        probe = np.random.default_rng(3).uniform(0, 1, size=(50, 1))
        ridge = make_trainer("fourier_ridge", {"N": 6, "lam": 1e-6})
        np.testing.assert_array_equal(ridge.fit(ds, 0).predict(probe),
                                      ridge.fit(ds, 1).predict(probe))
        tree = make_trainer("tree", {"max_depth": 4})
        np.testing.assert_array_equal(tree.fit(ds, 0).predict(probe),
                                      tree.fit(ds, 1).predict(probe))
