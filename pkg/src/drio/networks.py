"""Neural imputer backbones with exact parameter gradients.

Two backbones share one flat-parameter layout convention:

* ``mlp`` pushes each timestep's value/mask column pair through a feed-forward
  stack (no temporal coupling).
* ``birnn`` runs forward and backward two-gate (update/reset) recurrent passes
  over time, concatenates the hidden states, and projects per timestep.

The raw generator output is composed with the observations as
``x_hat = x_obs + (1 - mask) * g_raw``, so observed entries always pass through
untouched.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import autodiff as ad
from .data import batch_mean_impute
from .validation import as_binary_mask

KINDS = ("mlp", "birnn")
ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class BackboneSpec:
    kind: str
    hidden_dim: int
    layers: int
    n_features: int
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if min(self.hidden_dim, self.layers, self.n_features) < 1:
            raise ValueError("hidden_dim, layers, n_features must all be >= 1")

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind, "hidden_dim": self.hidden_dim, "layers": self.layers,
            "n_features": self.n_features, "activation": self.activation, "seed": self.seed,
        })

    @classmethod
    def from_json(cls, text: str) -> "BackboneSpec":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class ImputerParams:
    flat: np.ndarray
    spec: BackboneSpec

    def __post_init__(self):
        flat = np.ascontiguousarray(self.flat, dtype=np.float64)
        expected = count_params(self.spec)
        if flat.shape != (expected,):
            raise ValueError(f"flat vector has {flat.shape}, layout needs ({expected},)")
        if not np.isfinite(flat).all():
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "flat", flat)


@dataclass(frozen=True)
class ImputerInput:
    """Mean-filled values plus the visibility mask, both (B, D, T)."""

    x_filled: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x_filled, dtype=np.float64)
        if x.ndim != 3:
            raise ValueError(f"x_filled must be (B, D, T), got {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("x_filled must be finite everywhere")
        mask = as_binary_mask(self.mask, x.shape, "mask")
        object.__setattr__(self, "x_filled", x)
        object.__setattr__(self, "mask", mask)


@dataclass(frozen=True)
class ImputerOutput:
    g_raw: np.ndarray
    x_hat: np.ndarray


class GraphOutput:
    """Forward pass with live autodiff handles, consumed by loss closures."""

    def __init__(self, g_raw: ad.Tensor, x_hat: ad.Tensor, inp: ImputerInput):
        self.g_raw = g_raw
        self.x_hat = x_hat
        self.mask = inp.mask
        self.x_filled = inp.x_filled

    def detach(self) -> ImputerOutput:
        return ImputerOutput(g_raw=self.g_raw.value.copy(), x_hat=self.x_hat.value.copy())


def _layout(spec: BackboneSpec) -> list[tuple[str, tuple[int, ...]]]:
    d, h = spec.n_features, spec.hidden_dim
    blocks: list[tuple[str, tuple[int, ...]]] = []
    if spec.kind == "mlp":
        in_dim = 2 * d
        for layer in range(spec.layers):
            blocks += [(f"w{layer}", (in_dim, h)), (f"b{layer}", (h,))]
            in_dim = h
        blocks += [("w_out", (h, d)), ("b_out", (d,))]
    else:
        in_dim = 2 * d
        for layer in range(spec.layers):
            for direction in ("fw", "bw"):
                for gate in ("z", "r", "c"):
                    blocks += [
                        (f"l{layer}_{direction}_w{gate}", (in_dim, h)),
                        (f"l{layer}_{direction}_u{gate}", (h, h)),
                        (f"l{layer}_{direction}_b{gate}", (h,)),
                    ]
            in_dim = 2 * h
        blocks += [("w_out", (2 * h, d)), ("b_out", (d,))]
    return blocks


def count_params(spec: BackboneSpec) -> int:
    return sum(int(np.prod(shape)) for _, shape in _layout(spec))


def init_params(spec: BackboneSpec) -> ImputerParams:
    """Glorot-uniform weights, zero biases, deterministic per spec.seed."""
    rng = np.random.default_rng(spec.seed)
    pieces = []
    for _, shape in _layout(spec):
        if len(shape) == 2:
            bound = math.sqrt(6.0 / (shape[0] + shape[1]))
            pieces.append(rng.uniform(-bound, bound, size=shape).ravel())
        else:
            pieces.append(np.zeros(shape))
    return ImputerParams(flat=np.concatenate(pieces), spec=spec)


def _slice_blocks(theta: ad.Tensor, spec: BackboneSpec) -> dict[str, ad.Tensor]:
    views: dict[str, ad.Tensor] = {}
    offset = 0
    for name, shape in _layout(spec):
        size = int(np.prod(shape))
        views[name] = theta[offset:offset + size].reshape(*shape)
        offset += size
    return views


def _activation(spec: BackboneSpec) -> Callable[[ad.Tensor], ad.Tensor]:
    return (lambda t: t.relu()) if spec.activation == "relu" else (lambda t: t.tanh())


def _mlp_graph(views, spec, seq: ad.Tensor, batch: int, t_len: int) -> ad.Tensor:
    act = _activation(spec)
    h = seq.reshape(batch * t_len, 2 * spec.n_features)
    for layer in range(spec.layers):
        h = act(h @ views[f"w{layer}"] + views[f"b{layer}"])
    out = h @ views["w_out"] + views["b_out"]
    return out.reshape(batch, t_len, spec.n_features)


def _gru_pass(views, prefix: str, seq: ad.Tensor, batch: int, t_len: int,
              hidden: int, reverse: bool) -> list[ad.Tensor]:
    wz, uz, bz = views[f"{prefix}_wz"], views[f"{prefix}_uz"], views[f"{prefix}_bz"]
    wr, ur, br = views[f"{prefix}_wr"], views[f"{prefix}_ur"], views[f"{prefix}_br"]
    wc, uc, bc = views[f"{prefix}_wc"], views[f"{prefix}_uc"], views[f"{prefix}_bc"]
    h = ad.Tensor(np.zeros((batch, hidden)))
    steps = range(t_len - 1, -1, -1) if reverse else range(t_len)
    states: list[ad.Tensor] = [None] * t_len
    for t in steps:
        xt = seq[:, t, :]
        update = (xt @ wz + h @ uz + bz).sigmoid()
        reset = (xt @ wr + h @ ur + br).sigmoid()
        candidate = (xt @ wc + (reset * h) @ uc + bc).tanh()
        h = (1.0 - update) * h + update * candidate
        states[t] = h
    return states


def _birnn_graph(views, spec, seq: ad.Tensor, batch: int, t_len: int) -> ad.Tensor:
    h = spec.hidden_dim
    for layer in range(spec.layers):
        fw = _gru_pass(views, f"l{layer}_fw", seq, batch, t_len, h, reverse=False)
        bw = _gru_pass(views, f"l{layer}_bw", seq, batch, t_len, h, reverse=True)
        seq = ad.stack([ad.concat([fw[t], bw[t]], axis=1) for t in range(t_len)], axis=1)
    out = seq.reshape(batch * t_len, 2 * h) @ views["w_out"] + views["b_out"]
    return out.reshape(batch, t_len, spec.n_features)


def build_graph(params: ImputerParams, inp: ImputerInput) -> tuple[ad.Tensor, GraphOutput]:
    """Forward pass returning the parameter leaf and live output handles."""
    spec = params.spec
    batch, d, t_len = inp.x_filled.shape
    if d != spec.n_features:
        raise ValueError(f"input has {d} features, backbone expects {spec.n_features}")
    theta = ad.Tensor(params.flat)
    views = _slice_blocks(theta, spec)

    # (B, D, T) value/mask pair -> (B, T, 2D) channel-concatenated sequence
    seq_np = np.concatenate(
        [inp.x_filled.transpose(0, 2, 1), inp.mask.transpose(0, 2, 1)], axis=2
    )
    seq = ad.Tensor(seq_np)
    if spec.kind == "mlp":
        out = _mlp_graph(views, spec, seq, batch, t_len)
    else:
        out = _birnn_graph(views, spec, seq, batch, t_len)
    g_raw = out.transpose(0, 2, 1)

    x_obs = inp.x_filled * inp.mask
    x_hat = ad.Tensor(x_obs) + ad.Tensor(1.0 - inp.mask) * g_raw
    return theta, GraphOutput(g_raw=g_raw, x_hat=x_hat, inp=inp)


def forward(params: ImputerParams, inp: ImputerInput) -> ImputerOutput:
    _, graph = build_graph(params, inp)
    return graph.detach()


def loss_grad(params: ImputerParams, inp: ImputerInput,
              closure: Callable[[GraphOutput], ad.Tensor]) -> tuple[float, np.ndarray]:
    """Exact gradient of a scalar loss built from the forward pass.

    The closure receives live graph handles (g_raw, x_hat) and returns a scalar
    tensor; transport terms enter through autodiff.external on x_hat.
    """
    theta, graph = build_graph(params, inp)
    loss = closure(graph)
    if loss.value.ndim != 0:
        raise ValueError("closure must return a scalar")
    if not np.isfinite(loss.value):
        raise ValueError(f"non-finite loss: {loss.value}")
    loss.backward()
    grad = theta.grad if theta.grad is not None else np.zeros_like(params.flat)
    return float(loss.value), grad


def impute(params: ImputerParams, values: np.ndarray, mask: np.ndarray) -> ImputerOutput:
    """Mean-fill, run the backbone, and compose; whole input as one batch."""
    view = batch_mean_impute(values, mask)
    return forward(params, ImputerInput(x_filled=view.values, mask=mask))


def save_params(params: ImputerParams, path) -> None:
    """Descriptor line (backbone spec JSON) followed by the little-endian f64 flat vector."""
    with open(path, "wb") as fh:
        fh.write((params.spec.to_json() + "\n").encode("utf-8"))
        fh.write(params.flat.astype("<f8").tobytes())


def load_params(path) -> ImputerParams:
    raw = Path(path).read_bytes()
    newline = raw.index(b"\n")
    spec = BackboneSpec.from_json(raw[:newline].decode("utf-8"))
    flat = np.frombuffer(raw[newline + 1:], dtype="<f8")
    return ImputerParams(flat=flat.copy(), spec=spec)
