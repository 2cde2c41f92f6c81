"""Test-time metrics: masked MSE, closed-form 1-D Wasserstein-2, validation
reconstruction error, and Pareto dominance summaries."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .data import TimeSeriesDataset, batch_mean_impute
from .networks import ImputerInput, ImputerParams, forward
from .validation import check_same_shape


@dataclass(frozen=True)
class EvalReport:
    mse_missing: float
    w2: float
    recon_mse_observed: float
    n_eval_entries: int
    split: str = "test"

    def __post_init__(self):
        for name in ("mse_missing", "w2", "recon_mse_observed"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        if self.split not in ("val", "test"):
            raise ValueError(f"split must be 'val' or 'test', got {self.split!r}")


def mse_missing(ground_truth: np.ndarray, imputed: np.ndarray,
                eval_mask: np.ndarray) -> float:
    """Mean squared error over entries that are ground-truthed but hidden."""
    check_same_shape(ground_truth, imputed, "truth vs imputation")
    check_same_shape(ground_truth, eval_mask, "truth vs eval mask")
    count = eval_mask.sum()
    if count == 0:
        raise ValueError("eval mask selects no entries")
    return float((eval_mask * (ground_truth - imputed) ** 2).sum() / count)


def w2_1d(truth_values, imputed_values) -> float:
    """Closed-form 1-D Wasserstein-2 via quantile matching: sort both samples and
    take the root mean square of the order-statistic differences."""
    a = np.asarray(truth_values, dtype=np.float64).ravel()
    b = np.asarray(imputed_values, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty input")
    diff = np.sort(a) - np.sort(b)
    # fsum: correctly rounded, so the value is independent of summation order
    return math.sqrt(math.fsum(diff ** 2) / a.size)


def w2_bruteforce_oracle(a, b) -> float:
    """Minimum RMS pairing cost over all permutations (n <= 7)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty input")
    if a.size > 7:
        raise ValueError("permutation oracle limited to n <= 7")
    best = math.inf
    for perm in itertools.permutations(range(b.size)):
        best = min(best, math.fsum((a - b[list(perm)]) ** 2) / a.size)
    return math.sqrt(best)


def recon_mse_observed(split: TimeSeriesDataset, params: ImputerParams) -> float:
    """Generator-vs-observation MSE at the split's observed entries (whole split
    mean-filled as a single batch)."""
    mask = split.raw_mask
    if mask.sum() == 0:
        raise ValueError("split has no observed entries")
    view = batch_mean_impute(split.values, mask)
    out = forward(params, ImputerInput(x_filled=view.values, mask=mask))
    return float((mask * (split.values - out.g_raw) ** 2).sum() / mask.sum())


def evaluate_imputation(ground_truth: np.ndarray, imputed: np.ndarray,
                        eval_mask: np.ndarray, recon_observed: float,
                        split: str = "test") -> EvalReport:
    """Bundle the three metrics for one (method, split) pair."""
    truth_list = ground_truth[eval_mask == 1.0]
    imputed_list = imputed[eval_mask == 1.0]
    return EvalReport(
        mse_missing=mse_missing(ground_truth, imputed, eval_mask),
        w2=w2_1d(truth_list, imputed_list),
        recon_mse_observed=recon_observed,
        n_eval_entries=int(eval_mask.sum()),
        split=split,
    )


def pareto_table(reports: list[tuple[str, EvalReport]]) -> list[dict]:
    """Rows with a dominance flag: a row is dominated iff some other row is <= on
    both mse_missing and w2 with at least one strict inequality."""
    if not reports:
        raise ValueError("pareto table needs at least one report")
    rows = []
    for label, report in reports:
        dominated = any(
            other.mse_missing <= report.mse_missing and other.w2 <= report.w2
            and (other.mse_missing < report.mse_missing or other.w2 < report.w2)
            for other_label, other in reports if other_label != label
        )
        rows.append({
            "method": label,
            "split": report.split,
            "mse_missing": report.mse_missing,
            "w2": report.w2,
            "recon_mse_observed": report.recon_mse_observed,
            "n_eval_entries": report.n_eval_entries,
            "dominated": dominated,
        })
    return rows


def pareto_markdown(rows: list[dict]) -> str:
    lines = [
        "| method | split | mse_missing | w2 | recon_mse_observed | pareto |",
        "|---|---|---|---|---|---|",
    ]
    for row in rows:
        front = "dominated" if row["dominated"] else "front"
        lines.append(
            f"| {row['method']} | {row['split']} | {row['mse_missing']:.6f} "
            f"| {row['w2']:.6f} | {row['recon_mse_observed']:.6f} | {front} |"
        )
    return "\n".join(lines) + "\n"
