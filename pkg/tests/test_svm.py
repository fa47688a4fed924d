import numpy as np
import pytest

from uler.bench import auroc
from uler.svm import KernelSVM, KernelSvmConfig


def separable_data(n=120, seed=0, margin=2.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 3))
    y = (X[:, 0] > 0).astype(float)
    X[y == 1, 0] += margin
    X[y == 0, 0] -= margin
    return X, y


class TestKernelSvm:
    @pytest.mark.parametrize("kernel", ["linear", "poly", "rbf"])
    def test_separable_perfect_training_auroc(self, kernel):
        X, y = separable_data()
        model = KernelSVM(KernelSvmConfig(kernel=kernel, C=1.0)).fit(X, y)
        assert auroc(model.decision_function(X), y) == 1.0

    @pytest.mark.parametrize("C", [0.1, 1.0, 10.0])
    def test_dual_variables_in_box_and_kkt(self, C):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((150, 4))
        y = ((X[:, 0] * X[:, 1] + 0.4 * rng.standard_normal(150)) > 0).astype(float)
        model = KernelSVM(KernelSvmConfig(kernel="rbf", C=C)).fit(X, y)
        assert np.all(model.alpha >= -1e-12)
        assert np.all(model.alpha <= C + 1e-12)
        assert model.kkt_violation() <= model.tol + 1e-12

    def test_orientation_class_one_scores_high(self):
        X, y = separable_data(seed=2)
        model = KernelSVM(KernelSvmConfig(kernel="linear", C=1.0)).fit(X, y)
        scores = model.decision_function(X)
        assert scores[y == 1].min() > scores[y == 0].max()

    def test_duplicating_training_points_keeps_decision_function(self):
        # on a cleanly separable set no slack binds, so duplication is a no-op
        X, y = separable_data(n=60, seed=3, margin=3.0)
        cfg = KernelSvmConfig(kernel="linear", C=100.0)
        a = KernelSVM(cfg).fit(X, y)
        b = KernelSVM(cfg).fit(np.vstack([X, X]), np.concatenate([y, y]))
        queries = np.random.default_rng(4).standard_normal((50, 3))
        np.testing.assert_allclose(a.decision_function(queries), b.decision_function(queries), atol=1e-6)

    def test_single_class_rejected(self):
        X = np.random.default_rng(5).standard_normal((10, 2))
        with pytest.raises(ValueError, match="single-class"):
            KernelSVM(KernelSvmConfig()).fit(X, np.ones(10))

    def test_equality_constraint_preserved(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((80, 3))
        y = (X[:, 0] + 0.5 * rng.standard_normal(80) > 0).astype(float)
        model = KernelSVM(KernelSvmConfig(kernel="rbf", C=1.0)).fit(X, y)
        assert abs(np.sum(model.alpha * model.y_signed)) < 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((60, 3))
        y = (X[:, 0] > 0).astype(float)
        a = KernelSVM(KernelSvmConfig(kernel="rbf", C=1.0)).fit(X, y)
        b = KernelSVM(KernelSvmConfig(kernel="rbf", C=1.0)).fit(X, y)
        q = rng.standard_normal((20, 3))
        np.testing.assert_array_equal(a.decision_function(q), b.decision_function(q))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            KernelSvmConfig(kernel="sigmoid")
        with pytest.raises(ValueError):
            KernelSvmConfig(C=0.0)

    def test_json_dict_describes_fitted_model(self):
        X, y = separable_data(n=40, seed=8)
        model = KernelSVM(KernelSvmConfig(kernel="rbf", C=1.0)).fit(X, y)
        payload = model.to_json_dict()
        assert payload["kernel"] == "rbf"
        assert len(payload["support"]) == len(payload["dual_coef"])
        assert payload["bandwidth"] is not None
