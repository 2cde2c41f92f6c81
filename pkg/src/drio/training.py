"""Adversarial imputer training: inner trajectory ascent, outer descent, dual bound.

Per batch: mean-impute, forward, initialize the adversary batch at the batch
mean, run K gradient-ascent steps on the transport objective against the frozen
imputed cloud, then take one Adam step on alpha * recon + (1 - alpha) * divergence
with the adversaries held fixed. With alpha = 1 the transport machinery is
skipped entirely, so the parameter trajectory is bit-identical to plain
reconstruction training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .data import TimeSeriesDataset, batch_mean_impute
from .networks import (
    BackboneSpec,
    GraphOutput,
    ImputerInput,
    ImputerParams,
    build_graph,
    forward,
    init_params,
)
from .transport import (
    ADAPTIVE_FALLBACK,
    PointCloud,
    SinkhornConvergenceError,
    SinkhornParams,
    adaptive_epsilon,
    divergence_value_and_grad,
    solve_transport,
)

MAX_STEP_HALVINGS = 10


def _default_sinkhorn() -> SinkhornParams:
    # max_iter above the library default: training batches are small, and short
    # batches can land at blur values where the fixed point contracts slowly
    return SinkhornParams(epsilon=0.05, tau=10.0, max_iter=5000, tol=1e-6,
                          epsilon_mode="adaptive")


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.99
    gamma: float = 1.0
    inner_steps: int = 5
    inner_lr: float = 0.01
    lr: float = 5e-4
    weight_decay: float = 1e-6
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    sinkhorn: SinkhornParams = field(default_factory=_default_sinkhorn)
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.gamma < 0 or self.inner_steps < 0:
            raise ValueError("gamma and inner_steps must be nonnegative")
        if min(self.inner_lr, self.lr) <= 0 or self.weight_decay < 0:
            raise ValueError("learning rates must be positive, weight_decay nonnegative")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


@dataclass(frozen=True)
class AdversaryBatch:
    """Adversarial trajectories plus their per-sample mean-imputed anchors."""

    z: np.ndarray
    anchors: np.ndarray
    transport_cost: float
    objective_trace: tuple[float, ...] = ()

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        anchors = np.ascontiguousarray(self.anchors, dtype=np.float64)
        if z.shape != anchors.shape or z.ndim != 3:
            raise ValueError(f"z/anchors must share a (B, D, T) shape, got {z.shape} vs {anchors.shape}")
        if not np.isfinite(z).all():
            raise ValueError("adversarial trajectories must be finite")
        if abs(batch_transport_cost(anchors, z) - self.transport_cost) > 1e-10:
            raise ValueError("stored transport_cost does not match its recomputation")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "anchors", anchors)


@dataclass(frozen=True)
class LossReport:
    recon: float
    sinkhorn_term: float
    total: float
    epoch: int
    batch_index: int


@dataclass(frozen=True)
class DualBoundSpec:
    rho: float
    gamma_grid: tuple[float, ...]
    ascent_steps: int = 150
    restarts: int = 4

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        grid = tuple(float(g) for g in self.gamma_grid)
        if not grid or any(g < 0 for g in grid):
            raise ValueError("gamma_grid must be nonempty with nonnegative entries")
        object.__setattr__(self, "gamma_grid", grid)
        if self.ascent_steps < 1 or self.restarts < 1:
            raise ValueError("ascent_steps and restarts must be >= 1")


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), t=0)


def adam_update(params: ImputerParams, grad: np.ndarray, state: AdamState,
                cfg: TrainConfig) -> tuple[ImputerParams, AdamState]:
    """One Adam step with decoupled weight decay."""
    t = state.t + 1
    m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * grad
    v = cfg.adam_beta2 * state.v + (1.0 - cfg.adam_beta2) * grad ** 2
    m_hat = m / (1.0 - cfg.adam_beta1 ** t)
    v_hat = v / (1.0 - cfg.adam_beta2 ** t)
    step = cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    flat = params.flat - step - cfg.lr * cfg.weight_decay * params.flat
    return replace(params, flat=flat), AdamState(m=m, v=v, t=t)


def reconstruction_error(x_obs: np.ndarray, mask: np.ndarray, g_raw: np.ndarray) -> float:
    """Squared error between generator output and observations at observed
    entries, normalized by the batch's total observed count."""
    count = mask.sum()
    if count == 0:
        raise ValueError("no observed entries in batch")
    return float((mask * (x_obs - g_raw) ** 2).sum() / count)


def batch_transport_cost(anchors: np.ndarray, z: np.ndarray) -> float:
    """(1/B) sum of squared Frobenius distances between anchors and trajectories."""
    return float(((anchors - z) ** 2).sum(axis=(1, 2)).mean())


def init_adversary(values: np.ndarray, mask: np.ndarray) -> AdversaryBatch:
    """Batch-mean initialization: every trajectory starts at the mean table."""
    view = batch_mean_impute(values, mask)
    z0 = np.broadcast_to(view.mean_table, view.values.shape).copy()
    return AdversaryBatch(z=z0, anchors=view.values,
                          transport_cost=batch_transport_cost(view.values, z0))


def resolve_sinkhorn(cfg: TrainConfig, anchors: np.ndarray) -> SinkhornParams:
    """Concrete solver parameters for a batch; adaptive mode scales epsilon to
    the median nonzero pairwise distance of the mean-imputed batch."""
    sp = cfg.sinkhorn
    if sp.epsilon_mode != "adaptive":
        return sp
    if anchors.shape[0] < 2:
        # single-sample batch: no pairwise distances, so scale the blur to the
        # atom's own spread (~ the median rule's magnitude on standardized data)
        spread = 2.0 * anchors.size * float(anchors.var())
        eps = max(ADAPTIVE_FALLBACK, 0.05 * spread)
        return replace(sp, epsilon=eps, epsilon_mode="fixed")
    eps = adaptive_epsilon(PointCloud.uniform(anchors))
    return replace(sp, epsilon=eps, epsilon_mode="fixed")


class _InnerObjective:
    """J(Z) = divergence(cloud(Z), imputed cloud) - gamma * transport cost, with
    the imputed cloud frozen and its self-transport term cached."""

    def __init__(self, anchors: np.ndarray, imputed_cloud: PointCloud, gamma: float,
                 sinkhorn: SinkhornParams):
        self.anchors = anchors
        self.imputed_cloud = imputed_cloud
        self.gamma = gamma
        self.sinkhorn = sinkhorn
        res = solve_transport(imputed_cloud, imputed_cloud, sinkhorn)
        if not res.potentials.converged:
            raise SinkhornConvergenceError("imputed-cloud self transport did not converge")
        self.cached_self = res.value

    def value(self, z: np.ndarray) -> float:
        value, _ = self.value_and_grad(z, need_grad=False)
        return value

    def value_and_grad(self, z: np.ndarray, need_grad: bool = True):
        cloud = PointCloud.uniform(z)
        s_value, s_grad = divergence_value_and_grad(
            cloud, self.imputed_cloud, self.sinkhorn, side="first",
            cached_other_self=self.cached_self,
        )
        batch = z.shape[0]
        value = s_value - self.gamma * batch_transport_cost(self.anchors, z)
        if not need_grad:
            return value, None
        grad = s_grad + (2.0 * self.gamma / batch) * (self.anchors - z)
        if not np.isfinite(grad).all():
            raise FloatingPointError("non-finite adversary gradient")
        return value, grad


def objective_J(adv: AdversaryBatch, imputed_cloud: PointCloud, cfg: TrainConfig,
                sinkhorn: SinkhornParams | None = None) -> float:
    """Adversary objective at the batch's current trajectories."""
    sp = sinkhorn if sinkhorn is not None else resolve_sinkhorn(cfg, adv.anchors)
    return _InnerObjective(adv.anchors, imputed_cloud, cfg.gamma, sp).value(adv.z)


def _ascend(obj: _InnerObjective, z0: np.ndarray, steps: int, lr: float):
    """Gradient ascent with per-step halving: a step that would decrease the
    objective is retried at half the rate up to MAX_STEP_HALVINGS times, then
    skipped, so the recorded trace never decreases."""
    z = z0.copy()
    current, grad = obj.value_and_grad(z)
    trace = [current]
    for k in range(steps):
        step = lr
        accepted = None
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = z + step * grad
            value = obj.value(candidate)
            if value >= current:
                accepted = (candidate, value)
                break
            step *= 0.5
        if accepted is not None:
            z, current = accepted
            if k < steps - 1:
                _, grad = obj.value_and_grad(z)
        trace.append(current)
    return z, trace


def inner_ascent(adv: AdversaryBatch, imputed_cloud: PointCloud, cfg: TrainConfig,
                 sinkhorn: SinkhornParams | None = None) -> AdversaryBatch:
    """Run the inner maximization from the given adversary state."""
    sp = sinkhorn if sinkhorn is not None else resolve_sinkhorn(cfg, adv.anchors)
    obj = _InnerObjective(adv.anchors, imputed_cloud, cfg.gamma, sp)
    z, trace = _ascend(obj, adv.z, cfg.inner_steps, cfg.inner_lr)
    return AdversaryBatch(z=z, anchors=adv.anchors,
                          transport_cost=batch_transport_cost(adv.anchors, z),
                          objective_trace=tuple(trace))


def _recon_tensor(graph: GraphOutput) -> ad.Tensor:
    mask = graph.mask
    count = mask.sum()
    if count == 0:
        raise ValueError("no observed entries in batch")
    x_obs = graph.x_filled * mask
    diff = ad.Tensor(x_obs) - ad.Tensor(mask) * graph.g_raw
    return diff.square().sum() / count


def outer_step(inp: ImputerInput, adv: AdversaryBatch | None, params: ImputerParams,
               opt_state: AdamState, cfg: TrainConfig,
               sinkhorn: SinkhornParams | None = None,
               epoch: int = 0, batch_index: int = 0):
    """One Adam update of the imputer against fixed adversaries.

    Returns (params', opt_state', LossReport). With alpha = 1 the transport term
    is never touched (reported as 0.0), keeping the update bit-identical to
    reconstruction-only training.
    """
    theta, graph = build_graph(params, inp)
    recon_t = _recon_tensor(graph)
    recon = float(recon_t.value)
    if cfg.alpha < 1.0:
        if adv is None:
            raise ValueError("alpha < 1 requires an adversary batch")
        sp = sinkhorn if sinkhorn is not None else resolve_sinkhorn(cfg, adv.anchors)
        s_value, s_grad = divergence_value_and_grad(
            PointCloud.uniform(adv.z), PointCloud.uniform(graph.x_hat.value),
            sp, side="second",
        )
        loss_t = cfg.alpha * recon_t + (1.0 - cfg.alpha) * ad.external(
            s_value, graph.x_hat, s_grad
        )
        sinkhorn_term = s_value
    else:
        loss_t = cfg.alpha * recon_t
        sinkhorn_term = 0.0
    if not np.isfinite(loss_t.value):
        raise FloatingPointError(f"non-finite training loss: {loss_t.value}")
    loss_t.backward()
    new_params, new_state = adam_update(params, theta.grad, opt_state, cfg)
    total = cfg.alpha * recon + (1.0 - cfg.alpha) * sinkhorn_term
    report = LossReport(recon=recon, sinkhorn_term=sinkhorn_term, total=total,
                        epoch=epoch, batch_index=batch_index)
    return new_params, new_state, report


def train(train_split: TimeSeriesDataset, cfg: TrainConfig,
          backbone: BackboneSpec) -> tuple[ImputerParams, list[LossReport]]:
    """Full training loop over seeded shuffled batches; deterministic per seed."""
    if train_split.n_samples < 1:
        raise ValueError("empty training split")
    if backbone.n_features != train_split.n_features:
        raise ValueError("backbone n_features does not match the dataset")
    values, mask = train_split.values, train_split.raw_mask
    params = init_params(backbone)
    opt = AdamState.zeros(params.flat.size)
    rng = np.random.default_rng(cfg.seed)
    history: list[LossReport] = []
    n = train_split.n_samples
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for batch_index, start in enumerate(range(0, n, cfg.batch_size)):
            idx = perm[start:start + cfg.batch_size]
            xb, mb = values[idx], mask[idx]
            view = batch_mean_impute(xb, mb)
            inp = ImputerInput(x_filled=view.values, mask=mb)
            adv = None
            sp = None
            if cfg.alpha < 1.0:
                sp = resolve_sinkhorn(cfg, view.values)
                adv = init_adversary(xb, mb)
                if cfg.inner_steps > 0:
                    frozen = forward(params, inp)
                    adv = inner_ascent(adv, PointCloud.uniform(frozen.x_hat), cfg, sinkhorn=sp)
            params, opt, report = outer_step(
                inp, adv, params, opt, cfg, sinkhorn=sp,
                epoch=epoch, batch_index=batch_index,
            )
            history.append(report)
    return params, history


_BOUND_MAX_BATCH = 8
_BOUND_MAX_CELLS = 16
_BOUND_SEED = 20_407


def dual_bound_estimate(anchor_cloud: PointCloud, imputed_cloud: PointCloud,
                        spec: DualBoundSpec, cfg: TrainConfig) -> float:
    """min over the gamma grid of gamma * rho + (ascent estimate of the inner sup).

    The sup is estimated by multi-restart gradient ascent (anchor start, imputed
    start, then seeded jitters of the anchors), so the result is an approximate
    upper bound on the worst-case divergence over the transport ball. Restart
    seeds are fixed internally, which makes the estimate deterministic and hence
    nondecreasing in rho.
    """
    batch = anchor_cloud.n_atoms
    cells = int(np.prod(anchor_cloud.atoms.shape[1:]))
    if batch > _BOUND_MAX_BATCH or cells > _BOUND_MAX_CELLS:
        raise ValueError(
            f"dual bound limited to B <= {_BOUND_MAX_BATCH} and D*T <= {_BOUND_MAX_CELLS}"
        )
    sp = resolve_sinkhorn(cfg, anchor_cloud.atoms)
    anchors = anchor_cloud.atoms
    starts = [anchors]
    if imputed_cloud.n_atoms == batch:
        starts.append(imputed_cloud.atoms)
    scale = 0.5 * float(anchors.std()) + 0.1
    for extra in range(max(spec.restarts - len(starts), 0)):
        jitter_rng = np.random.default_rng(_BOUND_SEED + extra)
        starts.append(anchors + scale * jitter_rng.standard_normal(anchors.shape))

    best = math.inf
    for gamma in spec.gamma_grid:
        obj = _InnerObjective(anchors, imputed_cloud, gamma, sp)
        sup_estimate = -math.inf
        for z0 in starts:
            _, trace = _ascend(obj, z0, spec.ascent_steps, cfg.inner_lr)
            sup_estimate = max(sup_estimate, trace[-1])
        best = min(best, gamma * spec.rho + sup_estimate)
    return best
