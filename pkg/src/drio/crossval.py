"""Grid search over (alpha, gamma) with reconstruction-based or oracle selection.

Every cell is trained once with identical seeds and both selection criteria are
recorded, so the two CV modes can be compared on exactly the same fits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from .masking import MaskedDataset
from .metrics import mse_missing, recon_mse_observed
from .networks import BackboneSpec, ImputerParams, impute
from .training import TrainConfig, train

MODES = ("reconstruction", "oracle")


@dataclass(frozen=True)
class GridSpec:
    alphas: tuple[float, ...]
    gammas: tuple[float, ...]
    base: TrainConfig
    backbone: BackboneSpec

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        gammas = tuple(float(g) for g in self.gammas)
        if not alphas or not gammas:
            raise ValueError("alpha and gamma grids must be nonempty")
        if len(set(alphas)) != len(alphas) or len(set(gammas)) != len(gammas):
            raise ValueError("grid values must be unique")
        if any(not 0.0 <= a <= 1.0 for a in alphas) or any(g < 0 for g in gammas):
            raise ValueError("alphas must lie in [0, 1] and gammas be nonnegative")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "gammas", gammas)


@dataclass(frozen=True)
class CVCell:
    alpha: float
    gamma: float
    recon_val_mse: float | None
    oracle_val_mse: float | None
    params: ImputerParams | None
    status: str  # "ok" or "failed: <reason>"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class CVResult:
    cells: tuple[CVCell, ...]
    selected: tuple[float, float]
    mode: str


def _criterion(cell: CVCell, mode: str) -> float:
    return cell.recon_val_mse if mode == "reconstruction" else cell.oracle_val_mse


def _pick(cells, mode: str) -> CVCell:
    ok = [c for c in cells if c.ok]
    if not ok:
        raise RuntimeError("all grid cells failed")
    # lowest criterion, then larger alpha, then larger gamma
    return min(ok, key=lambda c: (_criterion(c, mode), -c.alpha, -c.gamma))


def grid_search(train_split: MaskedDataset, val_split: MaskedDataset,
                spec: GridSpec, mode: str = "reconstruction") -> CVResult:
    """Train one model per grid cell (identical seeds) and select per `mode`.

    Cell failures are recorded without aborting the rest of the grid.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    cells: list[CVCell] = []
    for alpha, gamma in itertools.product(spec.alphas, spec.gammas):
        cfg = replace(spec.base, alpha=alpha, gamma=gamma)
        try:
            params, _ = train(train_split.visible, cfg, spec.backbone)
            recon = recon_mse_observed(val_split.visible, params)
            out = impute(params, val_split.visible.values, val_split.gt_mask)
            oracle = mse_missing(val_split.data.values, out.x_hat, val_split.eval_mask)
            cells.append(CVCell(alpha=alpha, gamma=gamma, recon_val_mse=recon,
                                oracle_val_mse=oracle, params=params, status="ok"))
        except Exception as exc:  # recorded, not fatal to the grid
            cells.append(CVCell(alpha=alpha, gamma=gamma, recon_val_mse=None,
                                oracle_val_mse=None, params=None,
                                status=f"failed: {exc}"))
    best = _pick(cells, mode)
    return CVResult(cells=tuple(cells), selected=(best.alpha, best.gamma), mode=mode)


def select_best(result: CVResult) -> tuple[float, float, ImputerParams]:
    """Deterministic extraction of the winning cell (idempotent)."""
    best = _pick(result.cells, result.mode)
    return best.alpha, best.gamma, best.params
