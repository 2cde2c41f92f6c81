"""Distributionally robust multivariate time-series imputation.

Core pieces: dataset handling with binary observation masks, MCAR/MNAR
artificial missingness, entropic (un)balanced transport with a debiased
divergence and exact position gradients, small neural imputer backbones with
exact parameter gradients, the adversarial training loop, evaluation metrics,
and a cross-validation harness. `DRIOImputer` exposes the whole pipeline
through a fit/transform estimator surface; the `drio` CLI scripts it.
"""

__version__ = "0.1.0"

from .data import (
    MeanImputedView,
    NormStats,
    SplitSpec,
    SynthSpec,
    TimeSeriesDataset,
    apply_normalizer,
    batch_mean_impute,
    fit_normalizer,
    invert_normalizer,
    load_dataset,
    save_dataset,
    split_dataset,
    synth_generate,
)
from .estimator import DRIOImputer, MeanImputer
from .masking import (
    MaskPair,
    MaskedDataset,
    MissingSpec,
    apply_mcar,
    apply_mnar,
    compose_training_mask,
    mnar_weights,
)
from .metrics import EvalReport, mse_missing, pareto_table, recon_mse_observed, w2_1d
from .networks import (
    BackboneSpec,
    ImputerInput,
    ImputerOutput,
    ImputerParams,
    count_params,
    forward,
    impute,
    init_params,
    load_params,
    loss_grad,
    save_params,
)
from .crossval import CVResult, GridSpec, grid_search, select_best
from .training import (
    AdversaryBatch,
    DualBoundSpec,
    LossReport,
    TrainConfig,
    dual_bound_estimate,
    inner_ascent,
    objective_J,
    outer_step,
    reconstruction_error,
    train,
)
from .transport import (
    BALANCED,
    PointCloud,
    SinkhornParams,
    adaptive_epsilon,
    brute_force_primal,
    grad_positions,
    ground_cost,
    sinkhorn_divergence,
    solve_transport,
)
