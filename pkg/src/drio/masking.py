"""Artificial missingness on top of raw observation masks (MCAR and MNAR).

Both mechanisms hide exactly floor(ratio * n_observed) entries per sample and
are deterministic per seed: sample i draws from its own generator seeded with
(seed XOR i), so per-sample generation is order- and thread-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .data import TimeSeriesDataset
from .validation import as_binary_mask, check_probability

MECHANISMS = ("mcar", "mnar")


@dataclass(frozen=True)
class MissingSpec:
    mechanism: str
    ratio: float
    seed: int = 0

    def __post_init__(self):
        mech = str(self.mechanism).lower()
        if mech not in MECHANISMS:
            raise ValueError(f"mechanism must be one of {MECHANISMS}, got {self.mechanism!r}")
        object.__setattr__(self, "mechanism", mech)
        check_probability(self.ratio, "ratio")


@dataclass(frozen=True)
class MaskPair:
    """Raw observation mask plus the artificial ground-truth mask that hides
    a per-sample fraction of the observed entries (gt_mask <= raw_mask)."""

    raw_mask: np.ndarray
    gt_mask: np.ndarray
    spec: MissingSpec

    def __post_init__(self):
        raw = as_binary_mask(self.raw_mask, np.shape(self.raw_mask), "raw_mask")
        gt = as_binary_mask(self.gt_mask, raw.shape, "gt_mask")
        if ((gt == 1.0) & (raw == 0.0)).any():
            raise ValueError("gt_mask marks entries observed that raw_mask does not")
        object.__setattr__(self, "raw_mask", raw)
        object.__setattr__(self, "gt_mask", gt)


class TrainingMasks(NamedTuple):
    visible: np.ndarray     # what the model may see (the gt mask)
    evaluation: np.ndarray  # hidden-but-ground-truthed entries: raw AND NOT gt


def _per_sample_rng(seed: int, sample: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) ^ int(sample))


def apply_mcar(ds: TimeSeriesDataset, spec: MissingSpec) -> MaskPair:
    """Uniformly hide floor(ratio * n_observed) observed entries per sample."""
    if spec.mechanism != "mcar":
        raise ValueError(f"apply_mcar called with mechanism {spec.mechanism!r}")
    gt = ds.raw_mask.copy()
    flat_raw = ds.raw_mask.reshape(ds.n_samples, -1)
    flat_gt = gt.reshape(ds.n_samples, -1)
    for i in range(ds.n_samples):
        observed = np.flatnonzero(flat_raw[i] == 1.0)
        k = int(spec.ratio * observed.size)
        if k == 0:
            continue
        chosen = _per_sample_rng(spec.seed, i).choice(observed, size=k, replace=False)
        flat_gt[i, chosen] = 0.0
    return MaskPair(raw_mask=ds.raw_mask, gt_mask=gt, spec=spec)


def mnar_weights(ds: TimeSeriesDataset) -> np.ndarray:
    """Selection weight Phi(|z|) per observed entry; z-scores are feature-wise
    over all observed entries across samples and time. Zero at unobserved
    positions; features with zero spread get the z = 0 weight 0.5."""
    mask = ds.raw_mask
    counts = mask.sum(axis=(0, 2))
    if (counts < 2).any():
        raise ValueError("every feature needs at least 2 observed entries for MNAR weights")
    total = (ds.values * mask).sum(axis=(0, 2))
    mean = total / counts
    var = (mask * (ds.values - mean[None, :, None]) ** 2).sum(axis=(0, 2)) / counts
    std = np.sqrt(var)
    z = np.zeros_like(ds.values)
    nonzero = std > 0
    z[:, nonzero, :] = (ds.values[:, nonzero, :] - mean[nonzero][None, :, None]) / (
        std[nonzero][None, :, None]
    )
    return mask * ndtr(np.abs(z))


def apply_mnar(ds: TimeSeriesDataset, spec: MissingSpec) -> MaskPair:
    """Hide floor(ratio * n_observed) observed entries per sample, drawn without
    replacement with probability proportional to Phi(|z|) within the sample
    (Efraimidis-Spirakis exponential keys)."""
    if spec.mechanism != "mnar":
        raise ValueError(f"apply_mnar called with mechanism {spec.mechanism!r}")
    weights = mnar_weights(ds)
    gt = ds.raw_mask.copy()
    flat_raw = ds.raw_mask.reshape(ds.n_samples, -1)
    flat_w = weights.reshape(ds.n_samples, -1)
    flat_gt = gt.reshape(ds.n_samples, -1)
    for i in range(ds.n_samples):
        observed = np.flatnonzero(flat_raw[i] == 1.0)
        k = int(spec.ratio * observed.size)
        if k == 0:
            continue
        rng = _per_sample_rng(spec.seed, i)
        # smallest Exp(1)/w keys <=> inclusion probability proportional to w at each draw
        keys = rng.exponential(size=observed.size) / flat_w[i, observed]
        order = np.argsort(keys, kind="stable")
        flat_gt[i, observed[order[:k]]] = 0.0
    return MaskPair(raw_mask=ds.raw_mask, gt_mask=gt, spec=spec)


def apply_mechanism(ds: TimeSeriesDataset, spec: MissingSpec) -> MaskPair:
    if spec.mechanism == "mcar":
        return apply_mcar(ds, spec)
    return apply_mnar(ds, spec)


def compose_training_mask(pair: MaskPair) -> TrainingMasks:
    """Split a mask pair into the model-visible mask and the evaluation mask
    (entries with ground truth available but artificially hidden)."""
    visible = pair.gt_mask
    evaluation = pair.raw_mask * (1.0 - pair.gt_mask)
    return TrainingMasks(visible=visible, evaluation=evaluation)


@dataclass(frozen=True)
class MaskedDataset:
    """A dataset bundled with its artificial-mask overlay.

    `data` keeps the full ground truth (values + raw mask); `gt_mask` is what a
    model is allowed to see. Splitting carries both along.
    """

    data: TimeSeriesDataset
    gt_mask: np.ndarray

    def __post_init__(self):
        gt = as_binary_mask(self.gt_mask, self.data.values.shape, "gt_mask")
        if ((gt == 1.0) & (self.data.raw_mask == 0.0)).any():
            raise ValueError("gt_mask marks entries observed that raw_mask does not")
        object.__setattr__(self, "gt_mask", gt)

    @property
    def visible(self) -> TimeSeriesDataset:
        """Dataset as the model sees it: gt_mask is the observation mask."""
        return TimeSeriesDataset(
            values=self.data.values * self.gt_mask,
            raw_mask=self.gt_mask,
            feature_names=self.data.feature_names,
            name=self.data.name,
        )

    @property
    def eval_mask(self) -> np.ndarray:
        return self.data.raw_mask * (1.0 - self.gt_mask)

    def take(self, indices: np.ndarray, name: str | None = None) -> "MaskedDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return MaskedDataset(data=self.data.take(idx, name=name), gt_mask=self.gt_mask[idx].copy())
