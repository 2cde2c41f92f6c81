"""Input validation helpers shared by the data model and the estimator API."""

from __future__ import annotations

import numpy as np


def as_value_tensor(x, name: str = "values") -> np.ndarray:
    """Coerce to a C-contiguous float64 (N, D, T) tensor."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3-D (samples, features, time), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} must have N >= 1, D >= 1, T >= 1, got shape {arr.shape}")
    return arr


def as_binary_mask(m, shape: tuple[int, ...], name: str = "mask") -> np.ndarray:
    """Coerce to a float64 mask of the given shape with entries in {0, 1}."""
    arr = np.ascontiguousarray(m, dtype=np.float64)
    if arr.shape != tuple(shape):
        raise ValueError(f"{name} shape {arr.shape} does not match values shape {tuple(shape)}")
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError(f"{name} entries must be 0 or 1 (non-binary mask)")
    return arr


def check_finite_observed(values: np.ndarray, mask: np.ndarray, name: str = "values") -> None:
    observed = mask == 1.0
    if not np.isfinite(values[observed]).all():
        raise ValueError(f"{name} contains non-finite entries at observed positions")


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch between {what}: {a.shape} vs {b.shape}")


def check_probability(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie strictly in (0, 1), got {x}")
    return x
