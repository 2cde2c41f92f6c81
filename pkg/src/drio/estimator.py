"""Estimator-style wrappers so the imputer composes with the wider ecosystem.

Both estimators consume (N, D, T) float arrays where NaN marks a missing entry,
mirroring how 2-D imputers in scikit-learn treat NaN. `fit` learns from the
observed entries; `transform` returns a completed array in the input's units
with observed entries passed through untouched.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data import (
    TimeSeriesDataset,
    apply_normalizer,
    batch_mean_impute,
    fit_normalizer,
    invert_normalizer,
)
from .networks import BackboneSpec, forward, ImputerInput
from .training import TrainConfig, train
from .transport import BALANCED, SinkhornParams


def _split_nan(x) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"expected a 3-D (samples, features, time) array, got shape {arr.shape}")
    mask = np.isfinite(arr).astype(np.float64)
    return np.where(mask == 1.0, arr, 0.0), mask


def _resolve_tau(tau) -> float:
    if isinstance(tau, str):
        if tau != "balanced":
            raise ValueError(f"tau must be a positive number or 'balanced', got {tau!r}")
        return BALANCED
    return float(tau)


class DRIOImputer(TransformerMixin, BaseEstimator):
    """Adversarially regularized neural imputer with a fit/transform surface.

    Parameters mirror the training configuration: `alpha` trades reconstruction
    against the worst-case divergence term, `gamma` penalizes adversary
    transport cost, `tau` is the marginal-relaxation strength ('balanced' for
    hard marginals), and `epsilon` is either 'adaptive' or a fixed positive
    blur. Set `epochs` low for quick experiments.
    """

    def __init__(self, alpha=0.99, gamma=1.0, inner_steps=5, inner_lr=0.01,
                 lr=5e-4, weight_decay=1e-6, batch_size=32, epochs=30,
                 tau=10.0, epsilon="adaptive", backbone="mlp", hidden_dim=32,
                 layers=1, activation="relu", normalize=True, seed=0):
        self.alpha = alpha
        self.gamma = gamma
        self.inner_steps = inner_steps
        self.inner_lr = inner_lr
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.tau = tau
        self.epsilon = epsilon
        self.backbone = backbone
        self.hidden_dim = hidden_dim
        self.layers = layers
        self.activation = activation
        self.normalize = normalize
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        if self.epsilon == "adaptive":
            sinkhorn = SinkhornParams(epsilon=0.05, tau=_resolve_tau(self.tau),
                                      epsilon_mode="adaptive")
        else:
            sinkhorn = SinkhornParams(epsilon=float(self.epsilon),
                                      tau=_resolve_tau(self.tau), epsilon_mode="fixed")
        return TrainConfig(
            alpha=self.alpha, gamma=self.gamma, inner_steps=self.inner_steps,
            inner_lr=self.inner_lr, lr=self.lr, weight_decay=self.weight_decay,
            batch_size=self.batch_size, epochs=self.epochs, seed=self.seed,
            sinkhorn=sinkhorn,
        )

    def fit(self, X, y=None):
        values, mask = _split_nan(X)
        if mask.sum() == 0:
            raise ValueError("cannot fit on fully missing data")
        ds = TimeSeriesDataset(values=values, raw_mask=mask,
                               feature_names=[f"f{i}" for i in range(values.shape[1])])
        if self.normalize:
            self.norm_stats_ = fit_normalizer(ds)
            ds = apply_normalizer(ds, self.norm_stats_)
        else:
            self.norm_stats_ = None
        backbone = BackboneSpec(kind=self.backbone, hidden_dim=self.hidden_dim,
                                layers=self.layers, n_features=ds.n_features,
                                activation=self.activation, seed=self.seed)
        self.params_, self.history_ = train(ds, self._train_config(), backbone)
        self.n_features_in_ = ds.n_features
        return self

    def transform(self, X):
        if not hasattr(self, "params_"):
            raise NotFittedError("DRIOImputer must be fitted before calling transform")
        values, mask = _split_nan(X)
        if values.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {values.shape[1]} features, fitted on {self.n_features_in_}"
            )
        work = values.copy()
        if self.norm_stats_ is not None:
            work = mask * (values - self.norm_stats_.mean[None]) / self.norm_stats_.std[None]
        view = batch_mean_impute(work, mask)
        out = forward(self.params_, ImputerInput(x_filled=view.values, mask=mask))
        completed = out.x_hat
        if self.norm_stats_ is not None:
            completed = invert_normalizer(completed, self.norm_stats_)
        return np.where(mask == 1.0, np.asarray(X, dtype=np.float64), completed)


class MeanImputer(TransformerMixin, BaseEstimator):
    """Per-(feature, time) mean baseline with the same NaN-array surface."""

    def fit(self, X, y=None):
        values, mask = _split_nan(X)
        counts = mask.sum(axis=0)
        table = (values * mask).sum(axis=0) / np.maximum(counts, 1.0)
        self.mean_table_ = np.where(counts == 0, 0.0, table)
        self.n_features_in_ = values.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "mean_table_"):
            raise NotFittedError("MeanImputer must be fitted before calling transform")
        values, mask = _split_nan(X)
        if values.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {values.shape[1]} features, fitted on {self.n_features_in_}"
            )
        filled = values * mask + (1.0 - mask) * self.mean_table_[None]
        return np.where(mask == 1.0, np.asarray(X, dtype=np.float64), filled)
