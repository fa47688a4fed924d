import numpy as np
import pytest

from uler.explain import (
    Explanation,
    ExplainerConfig,
    exact_shapley,
    explanations_from_csv,
    explanations_to_csv,
    explanations_to_json,
    kernel_shap,
    rerun_explanations,
)
from uler.models import Predictor, PredictorKind, fit_predictor


def linear_predictor(weights, intercept=0.0):
    w = np.asarray(weights, dtype=float)
    return Predictor(PredictorKind.LINEAR_REGRESSION, d=w.size, intercept=intercept, l2=0.0, weights=w)


def full_budget(d):
    return max(2 * d, 2**d - 2)


class TestExactShapley:
    def test_efficiency_axiom(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            d = int(rng.integers(2, 7))
            X = rng.standard_normal((20, d))
            y = rng.standard_normal(20)
            f = fit_predictor(PredictorKind.KERNEL_RIDGE, X, y, l2=0.1)
            x = rng.standard_normal(d)
            bg = X[:8]
            e = exact_shapley(f, x, bg)
            fx = f.predict(x)
            assert abs(e.relevance.sum() + e.base_value - fx) < 1e-9

    def test_symmetry_axiom(self):
        f = linear_predictor([1.0, 1.0])
        bg = np.array([[0.5, 0.5], [-0.5, -0.5]])  # identical marginals
        e = exact_shapley(f, np.array([2.0, 2.0]), bg)
        assert abs(e.relevance[0] - e.relevance[1]) < 1e-9

    def test_dummy_axiom(self):
        f = linear_predictor([1.0, -2.0, 0.0])
        rng = np.random.default_rng(1)
        e = exact_shapley(f, rng.standard_normal(3), rng.standard_normal((6, 3)))
        assert abs(e.relevance[2]) < 1e-9

    def test_dimension_limit(self):
        f = linear_predictor(np.ones(13))
        with pytest.raises(ValueError, match="d <= 12"):
            exact_shapley(f, np.zeros(13), np.zeros((2, 13)))


class TestKernelShap:
    def test_linear_closed_form_full_enumeration(self):
        rng = np.random.default_rng(2)
        for d in (2, 3, 5):
            w = rng.standard_normal(d)
            f = linear_predictor(w, intercept=0.7)
            x = rng.standard_normal(d)
            bg = rng.standard_normal((12, d))
            cfg = ExplainerConfig(background=bg, n_samples=full_budget(d), seed=0)
            z = kernel_shap(f, x, cfg)
            np.testing.assert_allclose(z.relevance, w * (x - bg.mean(axis=0)), atol=1e-6)

    def test_matches_exact_oracle_full_enumeration(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((30, 3))
        y = (X[:, 0] * X[:, 1] > 0).astype(float)
        f = fit_predictor(PredictorKind.KERNEL_LOGISTIC, X, y, l2=0.1)
        x = rng.standard_normal(3)
        bg = X[:10]
        cfg = ExplainerConfig(background=bg, n_samples=full_budget(3), seed=1)
        z = kernel_shap(f, x, cfg)
        e = exact_shapley(f, x, bg)
        np.testing.assert_allclose(z.relevance, e.relevance, atol=1e-6)
        assert abs(z.base_value - e.base_value) < 1e-9

    def test_constant_predictor_zero_relevance(self):
        f = linear_predictor([0.0, 0.0], intercept=3.5)
        cfg = ExplainerConfig(background=np.zeros((4, 2)), n_samples=4, seed=0)
        z = kernel_shap(f, np.array([1.0, 2.0]), cfg)
        np.testing.assert_allclose(z.relevance, 0.0, atol=1e-12)
        assert z.base_value == 3.5

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(4)
        f = fit_predictor(PredictorKind.KERNEL_RIDGE, rng.standard_normal((20, 6)), rng.standard_normal(20), l2=0.1)
        x = rng.standard_normal(6)
        cfg = ExplainerConfig(background=rng.standard_normal((10, 6)), n_samples=20, seed=5)
        a = kernel_shap(f, x, cfg)
        b = kernel_shap(f, x, cfg)
        assert a.relevance.tobytes() == b.relevance.tobytes()

    def test_budget_validation(self):
        f = linear_predictor([1.0, 1.0, 1.0])
        cfg = ExplainerConfig(background=np.zeros((2, 3)), n_samples=5, seed=0)
        with pytest.raises(ValueError, match="n_samples"):
            kernel_shap(f, np.ones(3), cfg)

    def test_empty_background_rejected(self):
        with pytest.raises(ValueError, match="background"):
            ExplainerConfig(background=np.zeros((0, 3)), n_samples=10, seed=0)

    def test_permuting_features_permutes_relevance(self):
        rng = np.random.default_rng(6)
        d = 4
        w = rng.standard_normal(d)
        x = rng.standard_normal(d)
        bg = rng.standard_normal((8, d))
        perm = np.array([2, 0, 3, 1])
        cfg = ExplainerConfig(background=bg, n_samples=full_budget(d), seed=3)
        z = kernel_shap(linear_predictor(w), x, cfg)
        cfg_p = ExplainerConfig(background=bg[:, perm], n_samples=full_budget(d), seed=3)
        z_p = kernel_shap(linear_predictor(w[perm]), x[perm], cfg_p)
        np.testing.assert_allclose(z_p.relevance, z.relevance[perm], atol=1e-9)

    def test_background_cap_subsamples(self):
        rng = np.random.default_rng(7)
        f = linear_predictor([1.0, 2.0])
        bg = rng.standard_normal((50, 2))
        cfg = ExplainerConfig(background=bg, n_samples=4, seed=0, background_cap=5)
        z = kernel_shap(f, np.ones(2), cfg)
        assert np.isfinite(z.relevance).all()

    @pytest.mark.parametrize("d,data_seed", [(7, 8), (8, 4)])
    def test_convergence_to_exact_with_budget(self, d, data_seed):
        # seed-averaged error decreases monotonically over a doubling schedule
        rng = np.random.default_rng(data_seed)
        X = rng.standard_normal((40, d))
        y = rng.standard_normal(40)
        f = fit_predictor(PredictorKind.KERNEL_RIDGE, X, y, l2=0.1)
        x = rng.standard_normal(d)
        bg = X[:10]
        exact = exact_shapley(f, x, bg).relevance
        budgets = [2 * d, 4 * d, 8 * d, 16 * d]
        mean_errors = []
        for budget in budgets:
            errs = []
            for seed in range(20):
                cfg = ExplainerConfig(background=bg, n_samples=budget, seed=seed)
                errs.append(np.mean(np.abs(kernel_shap(f, x, cfg).relevance - exact)))
            mean_errors.append(np.mean(errs))
        assert all(b <= a * 1.05 for a, b in zip(mean_errors, mean_errors[1:]))
        assert mean_errors[-1] < mean_errors[0]


class TestRerun:
    def test_run_count_and_determinism(self):
        rng = np.random.default_rng(9)
        f = linear_predictor(rng.standard_normal(4))
        cfg = ExplainerConfig(background=rng.standard_normal((6, 4)), n_samples=8, seed=2)
        runs = rerun_explanations(f, rng.standard_normal(4), cfg, runs=10)
        assert len(runs) == 10
        again = rerun_explanations(f, np.asarray(runs[0].relevance) * 0 + rng.standard_normal(4), cfg, runs=2)
        assert len(again) == 2

    def test_same_config_identical_list(self):
        rng = np.random.default_rng(10)
        f = linear_predictor(rng.standard_normal(4))
        x = rng.standard_normal(4)
        cfg = ExplainerConfig(background=rng.standard_normal((6, 4)), n_samples=8, seed=2)
        a = rerun_explanations(f, x, cfg, runs=5)
        b = rerun_explanations(f, x, cfg, runs=5)
        for za, zb in zip(a, b):
            assert za.relevance.tobytes() == zb.relevance.tobytes()

    def test_full_enumeration_runs_identical(self):
        rng = np.random.default_rng(11)
        d = 3
        f = linear_predictor(rng.standard_normal(d))
        x = rng.standard_normal(d)
        cfg = ExplainerConfig(background=rng.standard_normal((5, d)), n_samples=full_budget(d), seed=0)
        runs = rerun_explanations(f, x, cfg, runs=4)
        for z in runs[1:]:
            np.testing.assert_allclose(z.relevance, runs[0].relevance, atol=1e-12)

    def test_requires_two_runs(self):
        f = linear_predictor([1.0, 1.0])
        cfg = ExplainerConfig(background=np.zeros((2, 2)), n_samples=4, seed=0)
        with pytest.raises(ValueError):
            rerun_explanations(f, np.ones(2), cfg, runs=1)


class TestSerialization:
    def test_csv_roundtrip(self, tmp_path):
        explanations = [
            Explanation(np.array([0.5, -1.25]), base_value=0.3, instance_id="a"),
            Explanation(np.array([1e-9, 2.0]), base_value=-4.0, instance_id="b"),
        ]
        path = tmp_path / "explanations.csv"
        explanations_to_csv(path, explanations, provenance='{"tool": "uler"}')
        back = explanations_from_csv(path)
        assert [e.instance_id for e in back] == ["a", "b"]
        for orig, rec in zip(explanations, back):
            np.testing.assert_allclose(rec.relevance, orig.relevance)
            assert rec.base_value == orig.base_value

    def test_json_export(self):
        text = explanations_to_json([Explanation(np.array([1.0, 2.0]), 0.0, "x")])
        assert '"instance_id": "x"' in text
