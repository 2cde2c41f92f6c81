import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from drio.estimator import DRIOImputer, MeanImputer


def nan_data(seed=0, n=16, d=2, t=8, missing=0.3, offset=5.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d, t)) + offset
    holes = rng.random(x.shape) < missing
    out = x.copy()
    out[holes] = np.nan
    return out


def quick_estimator(**kwargs):
    base = dict(epochs=1, batch_size=8, hidden_dim=6, alpha=0.5, gamma=1.0,
                inner_steps=1, seed=0)
    base.update(kwargs)
    return DRIOImputer(**base)


class TestSklearnSurface:
    def test_get_set_params_round_trip(self):
        est = quick_estimator(alpha=0.7)
        params = est.get_params()
        assert params["alpha"] == 0.7
        est.set_params(gamma=5.0)
        assert est.gamma == 5.0

    def test_clone(self):
        est = quick_estimator(tau="balanced")
        assert clone(est).get_params() == est.get_params()

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            quick_estimator().transform(nan_data())
        with pytest.raises(NotFittedError):
            MeanImputer().transform(nan_data())

    def test_fit_returns_self(self):
        est = quick_estimator()
        assert est.fit(nan_data()) is est


class TestDRIOImputer:
    def test_transform_fills_and_passes_through(self):
        x = nan_data(seed=1)
        est = quick_estimator().fit(x)
        filled = est.transform(x)
        observed = np.isfinite(x)
        assert np.isfinite(filled).all()
        assert np.array_equal(filled[observed], x[observed])

    def test_fit_transform(self):
        x = nan_data(seed=2)
        filled = quick_estimator().fit_transform(x)
        assert np.isfinite(filled).all()

    def test_deterministic(self):
        x = nan_data(seed=3)
        a = quick_estimator(seed=5).fit(x).transform(x)
        b = quick_estimator(seed=5).fit(x).transform(x)
        assert np.array_equal(a, b)

    def test_feature_count_checked(self):
        est = quick_estimator().fit(nan_data(seed=4, d=2))
        with pytest.raises(ValueError):
            est.transform(nan_data(seed=4, d=3))

    def test_rejects_non_3d(self):
        with pytest.raises(ValueError):
            quick_estimator().fit(np.zeros((4, 4)))

    def test_fully_missing_rejected(self):
        with pytest.raises(ValueError):
            quick_estimator().fit(np.full((2, 1, 3), np.nan))

    def test_normalization_recovers_offset_scale(self):
        # with normalize=True large offsets must not break training
        x = nan_data(seed=6, offset=100.0)
        filled = quick_estimator(epochs=2).fit_transform(x)
        hole_values = filled[~np.isfinite(x)]
        assert np.abs(hole_values - 100.0).mean() < 10.0

    def test_unnormalized_path(self):
        x = nan_data(seed=7, offset=0.0)
        filled = quick_estimator(normalize=False).fit_transform(x)
        assert np.isfinite(filled).all()

    def test_balanced_tau_accepted(self):
        x = nan_data(seed=8)
        filled = quick_estimator(tau="balanced", epochs=1).fit_transform(x)
        assert np.isfinite(filled).all()

    def test_invalid_tau_rejected(self):
        with pytest.raises(ValueError):
            quick_estimator(tau="loose").fit(nan_data())

    def test_birnn_backbone(self):
        x = nan_data(seed=9)
        filled = quick_estimator(backbone="birnn", hidden_dim=3).fit_transform(x)
        assert np.isfinite(filled).all()


class TestMeanImputer:
    def test_table_matches_observed_means(self):
        x = nan_data(seed=10)
        est = MeanImputer().fit(x)
        observed = np.isfinite(x)
        d, t = x.shape[1], x.shape[2]
        for i in range(d):
            for j in range(t):
                column = x[:, i, j]
                col_obs = column[np.isfinite(column)]
                expected = col_obs.mean() if col_obs.size else 0.0
                assert est.mean_table_[i, j] == pytest.approx(expected)

    def test_fills_with_table(self):
        x = np.array([[[1.0, np.nan]], [[3.0, np.nan]]])
        filled = MeanImputer().fit_transform(x)
        assert np.allclose(filled[:, 0, 0], [1.0, 3.0])
        assert np.allclose(filled[:, 0, 1], 0.0)  # never observed -> 0

    def test_feature_count_checked(self):
        est = MeanImputer().fit(nan_data(d=2))
        with pytest.raises(ValueError):
            est.transform(nan_data(d=3))
