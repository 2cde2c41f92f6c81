"""Dataset container, on-disk formats, splits, normalization, and the synthetic generator.

A dataset is an (N, D, T) value tensor plus a binary observation mask. In memory,
unobserved entries are stored as exact zeros (values = X * mask); on disk they are
NaN sentinels so that accidental use of unobserved payload is detectable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .validation import (
    as_binary_mask,
    as_value_tensor,
    check_finite_observed,
    check_same_shape,
)

STD_FLOOR = 1e-8

_META_NAME = "meta.json"
_VALUES_NAME = "values.bin"
_MASK_NAME = "mask.bin"
_GTMASK_NAME = "gtmask.bin"
_CSV_HEADER = ["sample", "feature", "time", "value", "observed"]


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Immutable (N, D, T) tensor with a binary observation mask.

    values: float64 tensor; zero wherever raw_mask is 0, finite wherever it is 1.
    raw_mask: float64 tensor of the same shape with entries in {0, 1}.
    feature_names: exactly D labels.
    """

    values: np.ndarray
    raw_mask: np.ndarray
    feature_names: tuple[str, ...]
    name: str = "dataset"

    def __post_init__(self):
        values = as_value_tensor(self.values)
        mask = as_binary_mask(self.raw_mask, values.shape, "raw_mask")
        check_finite_observed(values, mask)
        values = np.where(mask == 1.0, values, 0.0)  # zero out unobserved payload
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != values.shape[1]:
            raise ValueError(
                f"feature_names has {len(names)} entries but D = {values.shape[1]}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "raw_mask", mask)
        object.__setattr__(self, "feature_names", names)
        self.values.setflags(write=False)
        self.raw_mask.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def n_timesteps(self) -> int:
        return self.values.shape[2]

    def take(self, indices: np.ndarray, name: str | None = None) -> "TimeSeriesDataset":
        """Sample-level subset (used by splitting)."""
        idx = np.asarray(indices, dtype=np.intp)
        return TimeSeriesDataset(
            values=self.values[idx].copy(),
            raw_mask=self.raw_mask[idx].copy(),
            feature_names=self.feature_names,
            name=self.name if name is None else name,
        )


@dataclass(frozen=True)
class NormStats:
    """Per-(feature, time) mean/std fitted on the training split's observed entries."""

    mean: np.ndarray
    std: np.ndarray
    source_split: str = "train"

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        std = np.ascontiguousarray(self.std, dtype=np.float64)
        check_same_shape(mean, std, "mean/std tables")
        if (std < STD_FLOOR).any():
            raise ValueError(f"std entries must be >= {STD_FLOOR}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class MeanImputedView:
    """Values with missing entries replaced by the per-(d, t) batch mean."""

    values: np.ndarray
    mean_table: np.ndarray


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    val_fraction: float = 0.1
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(not 0.0 < f < 1.0 for f in fracs):
            raise ValueError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-12:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass(frozen=True)
class SynthSpec:
    """Configuration for the regime-switching sinusoid generator.

    Each regime draws per-feature amplitudes from its own contiguous sub-interval
    of amplitude_range (regime r gets the r-th of n_regimes equal parts), integer
    frequencies from frequency_range, and a random phase. Samples are assigned to
    regimes round-robin (sample i -> regime i mod n_regimes).
    """

    n_samples: int
    n_features: int
    n_timesteps: int
    n_regimes: int = 1
    amplitude_range: tuple[float, float] = (0.5, 2.0)
    frequency_range: tuple[float, float] = (1.0, 4.0)
    noise_std: float = 0.05
    mixing_strength: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.n_samples, self.n_features, self.n_timesteps, self.n_regimes) < 1:
            raise ValueError("n_samples, n_features, n_timesteps, n_regimes must be >= 1")
        for rng_name in ("amplitude_range", "frequency_range"):
            lo, hi = getattr(self, rng_name)
            if not hi >= lo:
                raise ValueError(f"{rng_name} is empty: ({lo}, {hi})")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if not 0.0 <= self.mixing_strength <= 1.0:
            raise ValueError("mixing_strength must lie in [0, 1]")


def save_dataset(ds: TimeSeriesDataset, path) -> None:
    """Write meta.json / values.bin / mask.bin, with NaN at unobserved entries."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": ds.name,
        "N": ds.n_samples,
        "D": ds.n_features,
        "T": ds.n_timesteps,
        "feature_names": list(ds.feature_names),
        "dtype": "f64",
        "layout": "sample-major [N][D][T]",
        "endianness": "little",
    }
    (out / _META_NAME).write_text(json.dumps(meta, indent=2) + "\n")
    payload = np.where(ds.raw_mask == 1.0, ds.values, np.nan)
    payload.astype("<f8").tofile(out / _VALUES_NAME)
    ds.raw_mask.astype(np.uint8).tofile(out / _MASK_NAME)


def load_dataset(path) -> TimeSeriesDataset:
    """Read a dataset directory (or a long-format CSV file)."""
    p = Path(path)
    if p.is_file() and p.suffix.lower() == ".csv":
        return _load_csv(p)
    meta_path = p / _META_NAME
    if not meta_path.exists():
        raise FileNotFoundError(f"no dataset at {p}: missing {_META_NAME}")
    meta = json.loads(meta_path.read_text())
    n, d, t = int(meta["N"]), int(meta["D"]), int(meta["T"])
    names = meta.get("feature_names", [f"f{i}" for i in range(d)])

    raw_values = np.fromfile(p / _VALUES_NAME, dtype="<f8")
    if raw_values.size != n * d * t:
        raise ValueError(
            f"dimension mismatch: meta declares {n}x{d}x{t} = {n * d * t} values, "
            f"payload has {raw_values.size}"
        )
    raw_mask = np.fromfile(p / _MASK_NAME, dtype=np.uint8)
    if raw_mask.size != n * d * t:
        raise ValueError(
            f"dimension mismatch: mask payload has {raw_mask.size} bytes, expected {n * d * t}"
        )
    if not np.isin(raw_mask, (0, 1)).all():
        bad = int(raw_mask[~np.isin(raw_mask, (0, 1))][0])
        raise ValueError(f"non-binary mask byte: {bad}")

    values = raw_values.reshape(n, d, t)
    mask = raw_mask.reshape(n, d, t).astype(np.float64)
    if not np.isfinite(values[mask == 1.0]).all():
        raise ValueError("NaN at observed entry in values payload")
    values = np.where(mask == 1.0, values, 0.0)
    return TimeSeriesDataset(values=values, raw_mask=mask, feature_names=names,
                             name=meta.get("name", p.name))


def save_gt_mask(gt_mask: np.ndarray, path) -> None:
    """Write the artificial-mask overlay beside a dataset directory."""
    out = Path(path)
    gt = np.ascontiguousarray(gt_mask)
    if not np.isin(gt, (0, 1)).all():
        raise ValueError("non-binary mask")
    tmp = out / (_GTMASK_NAME + ".tmp")
    gt.astype(np.uint8).tofile(tmp)
    tmp.replace(out / _GTMASK_NAME)


def load_gt_mask(path, ds: TimeSeriesDataset) -> np.ndarray:
    p = Path(path) / _GTMASK_NAME
    if not p.exists():
        raise FileNotFoundError(f"no artificial mask: {p} does not exist")
    raw = np.fromfile(p, dtype=np.uint8)
    expected = ds.n_samples * ds.n_features * ds.n_timesteps
    if raw.size != expected:
        raise ValueError(f"dimension mismatch: gtmask has {raw.size} bytes, expected {expected}")
    if not np.isin(raw, (0, 1)).all():
        raise ValueError("non-binary mask byte in gtmask")
    return raw.reshape(ds.values.shape).astype(np.float64)


def has_gt_mask(path) -> bool:
    return (Path(path) / _GTMASK_NAME).exists()


def _load_csv(path: Path) -> TimeSeriesDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != _CSV_HEADER:
            raise ValueError(f"CSV header must be {','.join(_CSV_HEADER)}")
        rows = [(int(r[0]), int(r[1]), int(r[2]), r[3], int(r[4])) for r in reader]
    if not rows:
        raise ValueError("empty CSV dataset")
    n = max(r[0] for r in rows) + 1
    d = max(r[1] for r in rows) + 1
    t = max(r[2] for r in rows) + 1
    values = np.zeros((n, d, t))
    mask = np.zeros((n, d, t))
    for i, j, k, val, obs in rows:
        if obs not in (0, 1):
            raise ValueError(f"non-binary mask value in CSV: {obs}")
        mask[i, j, k] = obs
        values[i, j, k] = float(val) if obs == 1 else 0.0
    return TimeSeriesDataset(values=values, raw_mask=mask,
                             feature_names=[f"f{i}" for i in range(d)], name=path.stem)


def split_dataset(ds: TimeSeriesDataset, spec: SplitSpec):
    """Disjoint sample-level train/val/test partition; remainder goes to train."""
    n = ds.n_samples
    if n < 3:
        raise ValueError(f"cannot split {n} samples into three nonempty sets")
    n_train = round(spec.train_fraction * n)
    n_val = round(spec.val_fraction * n)
    n_test = round(spec.test_fraction * n)
    n_train += n - (n_train + n_val + n_test)
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(
            f"N = {n} too small for nonempty splits with fractions "
            f"{spec.train_fraction}/{spec.val_fraction}/{spec.test_fraction}"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    idx_train = np.sort(perm[:n_train])
    idx_val = np.sort(perm[n_train:n_train + n_val])
    idx_test = np.sort(perm[n_train + n_val:])
    return (
        ds.take(idx_train, name=f"{ds.name}/train"),
        ds.take(idx_val, name=f"{ds.name}/val"),
        ds.take(idx_test, name=f"{ds.name}/test"),
    )


def split_indices(n: int, spec: SplitSpec):
    """Index sets of the partition produced by split_dataset (for pipelines that
    carry side arrays such as artificial masks along with the dataset)."""
    n_train = round(spec.train_fraction * n)
    n_val = round(spec.val_fraction * n)
    n_test = round(spec.test_fraction * n)
    n_train += n - (n_train + n_val + n_test)
    perm = np.random.default_rng(spec.seed).permutation(n)
    return (
        np.sort(perm[:n_train]),
        np.sort(perm[n_train:n_train + n_val]),
        np.sort(perm[n_train + n_val:]),
    )


def fit_normalizer(train: TimeSeriesDataset) -> NormStats:
    """Per-(d, t) mean/std over the training split's observed entries.

    Degenerate cells (no observations, or std below the floor) get std = 1 so
    that normalization never divides by a vanishing scale.
    """
    mask = train.raw_mask
    counts = mask.sum(axis=0)
    safe = np.maximum(counts, 1.0)
    mean = (train.values * mask).sum(axis=0) / safe
    var = (mask * (train.values - mean[None]) ** 2).sum(axis=0) / safe
    std = np.sqrt(var)
    degenerate = (counts == 0) | (std < STD_FLOOR)
    mean = np.where(counts == 0, 0.0, mean)
    std = np.where(degenerate, 1.0, std)
    return NormStats(mean=mean, std=std, source_split="train")


def apply_normalizer(ds: TimeSeriesDataset, stats: NormStats) -> TimeSeriesDataset:
    """Standardize observed entries; unobserved entries stay zero."""
    check_same_shape(stats.mean, ds.values[0], "stats vs dataset slice")
    normalized = ds.raw_mask * (ds.values - stats.mean[None]) / stats.std[None]
    return replace(ds, values=normalized)


def invert_normalizer(values: np.ndarray, stats: NormStats) -> np.ndarray:
    """Map normalized values (e.g. imputations) back to original units."""
    return values * stats.std[None] + stats.mean[None]


def batch_mean_impute(values: np.ndarray, mask: np.ndarray) -> MeanImputedView:
    """Fill missing entries with the per-(d, t) mean over the batch's observed entries.

    Positions unobserved in the whole batch are filled with 0.
    """
    values = np.asarray(values, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    check_same_shape(values, mask, "values vs mask")
    counts = mask.sum(axis=0)
    table = (values * mask).sum(axis=0) / np.maximum(counts, 1.0)
    table = np.where(counts == 0, 0.0, table)
    filled = values * mask + (1.0 - mask) * table[None]
    return MeanImputedView(values=filled, mean_table=table)


def synth_generate(spec: SynthSpec) -> TimeSeriesDataset:
    """Regime-switching sinusoid mixture with optional cross-feature mixing and noise.

    Integer frequencies mean every sinusoid completes whole periods over the T
    grid, so the per-feature temporal mean is exactly zero in the noiseless,
    unmixed case.
    """
    rng = np.random.default_rng(spec.seed)
    n, d, t, r = spec.n_samples, spec.n_features, spec.n_timesteps, spec.n_regimes

    a_lo, a_hi = spec.amplitude_range
    edges = np.linspace(a_lo, a_hi, r + 1)
    amps = np.empty((r, d))
    for reg in range(r):
        amps[reg] = rng.uniform(edges[reg], edges[reg + 1], size=d)

    f_lo, f_hi = spec.frequency_range
    lo_i, hi_i = math.ceil(f_lo), math.floor(f_hi)
    if hi_i < lo_i:
        raise ValueError(f"frequency_range ({f_lo}, {f_hi}) contains no integer")
    freqs = rng.integers(lo_i, hi_i + 1, size=(r, d)).astype(np.float64)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(r, d))

    mix = np.zeros((r, d, d))
    for reg in range(r):
        w = rng.uniform(-1.0, 1.0, size=(d, d)) / max(d - 1, 1)
        np.fill_diagonal(w, 0.0)
        mix[reg] = w

    grid = np.arange(t, dtype=np.float64)
    regimes = np.arange(n) % r
    base = amps[regimes][:, :, None] * np.sin(
        2.0 * math.pi * freqs[regimes][:, :, None] * grid[None, None, :] / t
        + phases[regimes][:, :, None]
    )
    values = base + spec.mixing_strength * np.einsum("ide,iet->idt", mix[regimes], base)
    if spec.noise_std > 0:
        values = values + spec.noise_std * rng.standard_normal(size=(n, d, t))

    return TimeSeriesDataset(
        values=values,
        raw_mask=np.ones((n, d, t)),
        feature_names=[f"f{i}" for i in range(d)],
        name=f"synth-{spec.seed}",
    )


def regime_labels(spec: SynthSpec) -> np.ndarray:
    """Regime assignment used by synth_generate (round-robin over samples)."""
    return np.arange(spec.n_samples) % spec.n_regimes
