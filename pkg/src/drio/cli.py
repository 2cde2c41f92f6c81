"""Command-line pipeline: synth, mask, train, impute, eval, cv.

Every artifact-producing command stages its outputs in a ``<out>.partial``
directory that is renamed into place on success, and records a run manifest
(resolved config, dataset fingerprint, seed, version, timestamps). With
``--threads 1`` (the default) reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import shutil
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .crossval import GridSpec, grid_search, select_best
from .data import (
    SplitSpec,
    SynthSpec,
    TimeSeriesDataset,
    apply_normalizer,
    batch_mean_impute,
    fit_normalizer,
    has_gt_mask,
    invert_normalizer,
    load_dataset,
    load_gt_mask,
    save_dataset,
    save_gt_mask,
    split_indices,
    synth_generate,
)
from .masking import MaskedDataset, MissingSpec, apply_mechanism
from .metrics import evaluate_imputation, pareto_markdown, pareto_table, recon_mse_observed
from .networks import (
    BackboneSpec,
    ImputerInput,
    forward,
    load_params,
    save_params,
)
from .training import TrainConfig, train
from .transport import BALANCED, SinkhornParams


class CliError(Exception):
    """Validation problem: wrong flags, missing inputs, schema mismatch (exit 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


# ---------------------------------------------------------------------------
# manifests and staging
# ---------------------------------------------------------------------------

def _fingerprint(data_dir: Path) -> str:
    digest = hashlib.sha256()
    for name in ("meta.json", "values.bin", "mask.bin", "gtmask.bin"):
        path = data_dir / name
        if path.exists():
            digest.update(name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def _manifest(command: str, config: dict, fingerprint: str, seed: int) -> dict:
    return {
        "command": command,
        "config": config,
        "dataset_fingerprint": fingerprint,
        "seed": seed,
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "finished": None,
        "status": "running",
    }


def _write_manifest(path: Path, manifest: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _finalize_manifest(path: Path, manifest: dict) -> None:
    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    manifest["status"] = "completed"
    _write_manifest(path, manifest)


class _StagedDir:
    """Temp directory renamed onto the final path on success."""

    def __init__(self, final: Path):
        self.final = final
        self.tmp = final.parent / (final.name + ".partial")

    def __enter__(self) -> Path:
        if self.final.exists():
            raise CliError(f"output path already exists: {self.final}")
        if self.tmp.exists():
            shutil.rmtree(self.tmp)
        self.tmp.mkdir(parents=True)
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.tmp.replace(self.final)
        else:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


# ---------------------------------------------------------------------------
# shared pipeline pieces
# ---------------------------------------------------------------------------

def _load_data_dir(path: str) -> TimeSeriesDataset:
    p = Path(path)
    if not p.exists():
        raise CliError(f"dataset path does not exist: {p}")
    try:
        return load_dataset(p)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        raise CliError(str(exc)) from exc


def _threads(args) -> int:
    env = os.environ.get("DRIO_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(f"DRIO_THREADS must be an integer, got {env!r}") from exc
    return args.threads


def _split_spec(args) -> SplitSpec:
    return SplitSpec(train_fraction=args.train_frac, val_fraction=args.val_frac,
                     test_fraction=args.test_frac, seed=args.split_seed)


def _prepare_splits(data_dir: Path, args):
    """Mask-aware 70/10/20 split with normalization fitted on the train split."""
    ds = _load_data_dir(data_dir)
    if has_gt_mask(data_dir):
        gt = load_gt_mask(data_dir, ds)
    else:
        gt = ds.raw_mask.copy()
    masked = MaskedDataset(data=ds, gt_mask=gt)
    idx_train, idx_val, idx_test = split_indices(ds.n_samples, _split_spec(args))
    parts = {
        "train": masked.take(idx_train, name=f"{ds.name}/train"),
        "val": masked.take(idx_val, name=f"{ds.name}/val"),
        "test": masked.take(idx_test, name=f"{ds.name}/test"),
    }
    stats = fit_normalizer(parts["train"].visible)
    normalized = {
        key: MaskedDataset(data=apply_normalizer(part.data, stats), gt_mask=part.gt_mask)
        for key, part in parts.items()
    }
    return normalized, stats


def _resolve_sinkhorn_config(tau, epsilon_mode: str, epsilon_value: float) -> SinkhornParams:
    if isinstance(tau, str):
        if tau != "balanced":
            raise CliError(f"tau must be a number or 'balanced', got {tau!r}")
        tau_value = BALANCED
    else:
        tau_value = float(tau)
    if epsilon_mode == "adaptive":
        return SinkhornParams(epsilon=0.05, tau=tau_value, epsilon_mode="adaptive")
    if epsilon_mode != "fixed":
        raise CliError(f"epsilon mode must be 'adaptive' or 'fixed', got {epsilon_mode!r}")
    return SinkhornParams(epsilon=float(epsilon_value), tau=tau_value, epsilon_mode="fixed")


def _apply_overrides(resolved: dict, overrides: dict, source: str) -> None:
    for key, value in overrides.items():
        if key not in resolved:
            raise CliError(f"unknown {source} key: {key}")
        if key in ("epsilon", "backbone"):
            if not isinstance(value, dict):
                raise CliError(f"{source} key {key!r} must be an object")
            resolved[key] = {**resolved[key], **value}
        else:
            resolved[key] = value


def _config_from_resolved(resolved: dict) -> TrainConfig:
    try:
        sinkhorn = _resolve_sinkhorn_config(resolved["tau"], resolved["epsilon"]["mode"],
                                            resolved["epsilon"]["value"])
        return TrainConfig(
            alpha=float(resolved["alpha"]), gamma=float(resolved["gamma"]),
            inner_steps=int(resolved["inner_steps"]), inner_lr=float(resolved["inner_lr"]),
            lr=float(resolved["lr"]), weight_decay=float(resolved["weight_decay"]),
            batch_size=int(resolved["batch_size"]), epochs=int(resolved["epochs"]),
            seed=int(resolved["seed"]), sinkhorn=sinkhorn,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _train_config_from_args(args) -> tuple[TrainConfig, dict]:
    """CLI defaults, overridden by --config keys when a config file is given."""
    resolved = {
        "alpha": args.alpha, "gamma": args.gamma, "inner_steps": args.inner_steps,
        "inner_lr": args.inner_lr, "lr": args.lr, "weight_decay": args.weight_decay,
        "batch_size": args.batch_size, "epochs": args.epochs, "seed": args.seed,
        "tau": args.tau,
        "epsilon": {"mode": args.epsilon, "value": args.epsilon_value},
        "backbone": {"kind": args.backbone, "hidden_dim": args.hidden_dim,
                     "layers": args.layers},
    }
    if getattr(args, "config", None):
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            raise CliError(f"config file does not exist: {cfg_path}")
        try:
            loaded = json.loads(cfg_path.read_text())
        except json.JSONDecodeError as exc:
            raise CliError(f"config is not valid JSON: {exc}") from exc
        _apply_overrides(resolved, loaded, "config")
    return _config_from_resolved(resolved), resolved


def _backbone_from_resolved(resolved: dict, n_features: int, seed: int,
                            activation: str) -> BackboneSpec:
    block = resolved["backbone"]
    try:
        return BackboneSpec(kind=block["kind"], hidden_dim=int(block["hidden_dim"]),
                            layers=int(block["layers"]), n_features=n_features,
                            activation=activation, seed=seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _write_history_csv(path: Path, history) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "batch", "recon", "sinkhorn", "total"])
        for item in history:
            writer.writerow([item.epoch, item.batch_index,
                             f"{item.recon:.12g}", f"{item.sinkhorn_term:.12g}",
                             f"{item.total:.12g}"])


def _impute_split(params, split: MaskedDataset) -> np.ndarray:
    view = batch_mean_impute(split.visible.values, split.gt_mask)
    out = forward(params, ImputerInput(x_filled=view.values, mask=split.gt_mask))
    return out.x_hat


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_samples=args.n, n_features=args.d, n_timesteps=args.t,
        n_regimes=args.regimes, noise_std=args.noise,
        mixing_strength=args.mixing, seed=args.seed,
        amplitude_range=(args.amp_lo, args.amp_hi),
        frequency_range=(args.freq_lo, args.freq_hi),
    )
    out = Path(args.out)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    manifest = _manifest("synth", config | {"threads": _threads(args)}, "", args.seed)
    with _StagedDir(out) as tmp:
        ds = synth_generate(spec)
        save_dataset(ds, tmp)
        _write_manifest(tmp / "manifest.json", manifest)
        _finalize_manifest(tmp / "manifest.json", manifest)
    print(f"wrote synthetic dataset {ds.n_samples}x{ds.n_features}x{ds.n_timesteps} to {out}")
    return 0


def cmd_mask(args) -> int:
    data_dir = Path(args.data)
    ds = _load_data_dir(data_dir)
    try:
        spec = MissingSpec(mechanism=args.mechanism, ratio=args.ratio, seed=args.seed)
        pair = apply_mechanism(ds, spec)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    manifest = _manifest("mask", {"mechanism": spec.mechanism, "ratio": spec.ratio,
                                  "seed": spec.seed, "threads": _threads(args)},
                         _fingerprint(data_dir), spec.seed)
    _write_manifest(data_dir / "mask_manifest.json", manifest)
    save_gt_mask(pair.gt_mask, data_dir)
    _finalize_manifest(data_dir / "mask_manifest.json", manifest)
    hidden = int((pair.raw_mask * (1 - pair.gt_mask)).sum())
    print(f"wrote gtmask.bin ({hidden} artificially hidden entries) beside {data_dir}")
    return 0


def cmd_train(args) -> int:
    data_dir = Path(args.data)
    cfg, resolved = _train_config_from_args(args)
    splits, _ = _prepare_splits(data_dir, args)
    train_split = splits["train"]
    backbone = _backbone_from_resolved(resolved, train_split.data.n_features,
                                       cfg.seed, args.activation)
    manifest = _manifest("train", resolved | {"threads": _threads(args)},
                         _fingerprint(data_dir), cfg.seed)
    out = Path(args.out)
    with _StagedDir(out) as tmp:
        _write_manifest(tmp / "manifest.json", manifest)
        params, history = train(train_split.visible, cfg, backbone)
        save_params(params, tmp / "params.bin")
        _write_history_csv(tmp / "history.csv", history)
        _finalize_manifest(tmp / "manifest.json", manifest)
    print(f"trained {backbone.kind} ({len(history)} batch updates) -> {out}/params.bin")
    return 0


def cmd_impute(args) -> int:
    data_dir = Path(args.data)
    params_path = Path(args.params)
    if not params_path.exists():
        raise CliError(f"params file does not exist: {params_path}")
    params = load_params(params_path)
    _, stats = _prepare_splits(data_dir, args)  # normalization from the train split
    raw = _load_data_dir(data_dir)
    gt = load_gt_mask(data_dir, raw) if has_gt_mask(data_dir) else raw.raw_mask.copy()
    masked = MaskedDataset(data=apply_normalizer(raw, stats), gt_mask=gt)
    x_hat = _impute_split(params, masked)
    completed = invert_normalizer(x_hat, stats)
    completed = np.where(gt == 1.0, raw.values, completed)

    out = Path(args.out)
    manifest = _manifest("impute", {"params": str(params_path),
                                    "threads": _threads(args)},
                         _fingerprint(data_dir), params.spec.seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / (out.name + ".partial")
    completed.astype("<f8").tofile(tmp)
    tmp.replace(out)
    meta = {"N": raw.n_samples, "D": raw.n_features, "T": raw.n_timesteps,
            "dtype": "f64", "layout": "sample-major [N][D][T]", "endianness": "little"}
    (out.parent / (out.stem + "_meta.json")).write_text(json.dumps(meta, indent=2) + "\n")
    _write_manifest(out.parent / "impute_manifest.json", manifest)
    _finalize_manifest(out.parent / "impute_manifest.json", manifest)
    print(f"wrote imputed tensor to {out}")
    return 0


def cmd_eval(args) -> int:
    data_dir = Path(args.data)
    if not has_gt_mask(data_dir):
        raise CliError(f"no artificial mask: run `drio mask` on {data_dir} first")
    params_path = Path(args.params)
    if not params_path.exists():
        raise CliError(f"params file does not exist: {params_path}")
    params = load_params(params_path)
    splits, _ = _prepare_splits(data_dir, args)
    split = splits[args.split]
    if split.eval_mask.sum() == 0:
        raise CliError(f"{args.split} split has no artificially masked entries")

    rows = []
    x_hat = _impute_split(params, split)
    recon = recon_mse_observed(split.visible, params)
    rows.append(("model", evaluate_imputation(split.data.values, x_hat,
                                              split.eval_mask, recon, split=args.split)))
    if args.baseline == "mean":
        view = batch_mean_impute(split.visible.values, split.gt_mask)
        baseline = split.visible.values + (1.0 - split.gt_mask) * view.mean_table[None]
        base_recon = float(
            (split.gt_mask * (split.visible.values - view.mean_table[None]) ** 2).sum()
            / split.gt_mask.sum()
        )
        rows.append(("mean", evaluate_imputation(split.data.values, baseline,
                                                 split.eval_mask, base_recon,
                                                 split=args.split)))
    table = pareto_table(rows)

    out = Path(args.out) if args.out else None
    manifest = _manifest("eval", {"params": str(params_path), "split": args.split,
                                  "baseline": args.baseline, "threads": _threads(args)},
                         _fingerprint(data_dir), params.spec.seed)
    lines = ["method,split,mse_missing,w2,recon_mse_observed,n_eval_entries"]
    for row in table:
        lines.append(
            f"{row['method']},{row['split']},{row['mse_missing']:.12g},"
            f"{row['w2']:.12g},{row['recon_mse_observed']:.12g},{row['n_eval_entries']}"
        )
    csv_text = "\n".join(lines) + "\n"
    print(csv_text, end="")
    if out is not None:
        with _StagedDir(out) as tmp:
            _write_manifest(tmp / "manifest.json", manifest)
            (tmp / "eval.csv").write_text(csv_text)
            (tmp / "pareto.md").write_text(pareto_markdown(table))
            _finalize_manifest(tmp / "manifest.json", manifest)
    return 0


def cmd_cv(args) -> int:
    data_dir = Path(args.data)
    if not has_gt_mask(data_dir):
        raise CliError(f"no artificial mask: run `drio mask` on {data_dir} first")
    grid_path = Path(args.grid)
    if not grid_path.exists():
        raise CliError(f"grid file does not exist: {grid_path}")
    try:
        grid_json = json.loads(grid_path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"grid file is not valid JSON: {exc}") from exc
    for key in ("alphas", "gammas"):
        if key not in grid_json:
            raise CliError(f"grid file missing key: {key}")

    _, resolved = _train_config_from_args(args)
    overrides = {k: v for k, v in grid_json.items() if k not in ("alphas", "gammas")}
    _apply_overrides(resolved, overrides, "grid config")
    cfg = _config_from_resolved(resolved)

    splits, _ = _prepare_splits(data_dir, args)
    backbone = _backbone_from_resolved(resolved, splits["train"].data.n_features,
                                       cfg.seed, args.activation)
    try:
        grid = GridSpec(alphas=tuple(grid_json["alphas"]), gammas=tuple(grid_json["gammas"]),
                        base=cfg, backbone=backbone)
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    manifest = _manifest("cv", resolved | {"alphas": list(grid.alphas),
                                           "gammas": list(grid.gammas),
                                           "mode": args.mode,
                                           "threads": _threads(args)},
                         _fingerprint(data_dir), cfg.seed)
    out = Path(args.out)
    with _StagedDir(out) as tmp:
        _write_manifest(tmp / "manifest.json", manifest)
        result = grid_search(splits["train"], splits["val"], grid, mode=args.mode)
        alpha, gamma, params = select_best(result)
        with open(tmp / "cv_results.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha", "gamma", "recon_val_mse", "oracle_val_mse", "status"])
            for cell in result.cells:
                writer.writerow([
                    cell.alpha, cell.gamma,
                    "" if cell.recon_val_mse is None else f"{cell.recon_val_mse:.12g}",
                    "" if cell.oracle_val_mse is None else f"{cell.oracle_val_mse:.12g}",
                    cell.status,
                ])
        (tmp / "selected.json").write_text(json.dumps(
            {"alpha": alpha, "gamma": gamma, "mode": result.mode}, indent=2) + "\n")
        save_params(params, tmp / "params.bin")
        _finalize_manifest(tmp / "manifest.json", manifest)
    print(f"cv selected alpha={alpha} gamma={gamma} ({args.mode} mode) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub, with_split=True):
    sub.add_argument("--threads", type=int, default=1,
                     help="internal parallelism (1 = bit-reproducible; env DRIO_THREADS overrides)")
    if with_split:
        sub.add_argument("--split-seed", type=int, default=0, help="seed for the 70/10/20 split")
        sub.add_argument("--train-frac", type=float, default=0.7, help="train fraction")
        sub.add_argument("--val-frac", type=float, default=0.1, help="validation fraction")
        sub.add_argument("--test-frac", type=float, default=0.2, help="test fraction")


def _add_train_flags(sub):
    sub.add_argument("--config", default=None, help="JSON training config (overrides flags)")
    sub.add_argument("--alpha", type=float, default=0.99, help="reconstruction weight in [0,1]")
    sub.add_argument("--gamma", type=float, default=1.0, help="adversary transport-cost penalty")
    sub.add_argument("--inner-steps", type=int, default=5, help="adversary ascent steps per batch")
    sub.add_argument("--inner-lr", type=float, default=0.01, help="adversary ascent rate")
    sub.add_argument("--lr", type=float, default=5e-4, help="Adam learning rate")
    sub.add_argument("--weight-decay", type=float, default=1e-6, help="decoupled weight decay")
    sub.add_argument("--batch-size", type=int, default=32, help="training batch size")
    sub.add_argument("--epochs", type=int, default=30, help="training epochs")
    sub.add_argument("--seed", type=int, default=0, help="training / init seed")
    sub.add_argument("--tau", default=10.0,
                     help="marginal relaxation strength (number or 'balanced')")
    sub.add_argument("--epsilon", choices=("adaptive", "fixed"), default="adaptive",
                     help="blur mode for the transport term")
    sub.add_argument("--epsilon-value", type=float, default=0.05,
                     help="blur value when --epsilon fixed")
    sub.add_argument("--backbone", choices=("mlp", "birnn"), default="mlp",
                     help="imputer backbone")
    sub.add_argument("--hidden-dim", type=int, default=64, help="backbone hidden width")
    sub.add_argument("--layers", type=int, default=1, help="backbone depth")
    sub.add_argument("--activation", choices=("relu", "tanh"), default="relu",
                     help="mlp activation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drio",
                     description="Distributionally robust time-series imputation pipeline")
    parser.add_argument("--version", action="version", version=f"drio {__version__}")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)
    formatter = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = subs.add_parser("synth", help="generate a synthetic dataset directory", **formatter)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--d", type=int, required=True, help="number of features")
    p.add_argument("--t", type=int, required=True, help="number of timesteps")
    p.add_argument("--regimes", type=int, default=1, help="number of generating regimes")
    p.add_argument("--noise", type=float, default=0.05, help="Gaussian noise std")
    p.add_argument("--mixing", type=float, default=0.0, help="cross-feature mixing strength")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--amp-lo", type=float, default=0.5, help="amplitude range low end")
    p.add_argument("--amp-hi", type=float, default=2.0, help="amplitude range high end")
    p.add_argument("--freq-lo", type=float, default=1.0, help="frequency range low end")
    p.add_argument("--freq-hi", type=float, default=4.0, help="frequency range high end")
    _add_common(p, with_split=False)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("mask", help="write an artificial missingness mask beside a dataset", **formatter)
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--mechanism", choices=("mcar", "mnar"), required=True,
                   help="missingness mechanism")
    p.add_argument("--ratio", type=float, required=True, help="missing ratio in (0,1)")
    p.add_argument("--seed", type=int, default=0, help="masking seed")
    _add_common(p, with_split=False)
    p.set_defaults(func=cmd_mask)

    p = subs.add_parser("train", help="train an imputer on the train split", **formatter)
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="output run directory")
    _add_train_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("impute", help="impute a dataset with trained parameters", **formatter)
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--params", required=True, help="params.bin checkpoint")
    p.add_argument("--out", required=True, help="output imputed.bin path")
    _add_common(p)
    p.set_defaults(func=cmd_impute)

    p = subs.add_parser("eval", help="evaluate a trained imputer on a held-out split", **formatter)
    p.add_argument("--data", required=True, help="dataset directory (must carry gtmask.bin)")
    p.add_argument("--params", required=True, help="params.bin checkpoint")
    p.add_argument("--baseline", choices=("mean",), default=None,
                   help="optionally add a baseline row")
    p.add_argument("--split", choices=("val", "test"), default="test",
                   help="which split to evaluate")
    p.add_argument("--out", default=None, help="optional output directory for eval.csv/pareto.md")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("cv", help="grid search (alpha, gamma) with CV selection", **formatter)
    p.add_argument("--data", required=True, help="dataset directory (must carry gtmask.bin)")
    p.add_argument("--grid", required=True, help="grid JSON: {alphas, gammas, ...config}")
    p.add_argument("--mode", choices=("reconstruction", "oracle"), default="reconstruction",
                   help="selection criterion")
    p.add_argument("--out", required=True, help="output directory")
    _add_train_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_cv)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
