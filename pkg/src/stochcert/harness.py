"""Experiment harness: configuration, sweep execution over
(perturbation strength, attack samples, inference samples) grids, and
CSV/JSON result emission.

Every random choice is pre-seeded from the master seed by cell, repeat,
point and role, so sweep output is a pure function of the resolved config
regardless of scheduling or worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .attacks import AttackSpec, run_attack
from .certify import empirical_lipschitz, linear_certificate, smooth_certificate
from .datasets import Dataset, DatasetSpec, gen_dataset
from .models import (
    NoiseSpec,
    StochasticModel,
    TrainOptions,
    make_linear_gaussian,
    mc_predict,
    sample_params,
    train,
)
from .numerics import Seed, split_seed

CONFIG_VERSION = 1

CSV_COLUMNS = (
    "eta",
    "s_attack",
    "s_infer",
    "repeat",
    "clean_acc",
    "adv_acc",
    "eff_len",
    "mean_cos",
    "mean_grad_norm",
    "cert_lin",
    "cert_smooth",
    "skipped",
)


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep cell: grid keys plus the aggregated metrics."""

    eta: float
    s_attack: int
    s_infer: int
    repeat: int
    clean_acc: float
    adv_acc: float
    eff_len: float
    mean_cos: float
    mean_grad_norm: float
    cert_lin: float
    cert_smooth: float
    skipped: int


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    model: dict
    attack_method: str
    attack_loss: str
    etas: tuple[float, ...]
    s_attack_grid: tuple[int, ...]
    s_infer_grid: tuple[int, ...]
    n_points: int
    repeats: int
    master_seed: int
    smooth_l: float | None = None
    box: tuple[float, float] | None = (0.0, 1.0)
    workers: int = 1

    def __post_init__(self):
        if not self.etas or any(e <= 0 for e in self.etas):
            raise ValueError("etas must be positive")
        if any(s < 1 for s in self.s_attack_grid + self.s_infer_grid):
            raise ValueError("grid sample sizes must be >= 1")
        if self.n_points < 1 or self.repeats < 1 or self.workers < 1:
            raise ValueError("n_points, repeats and workers must be >= 1")


def config_from_dict(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from parsed JSON; flag overrides win over file values."""
    raw = dict(raw)
    if raw.get("version") != CONFIG_VERSION:
        raise ValueError(f"config version must be {CONFIG_VERSION}")
    overrides = overrides or {}
    if "seed" in overrides and overrides["seed"] is not None:
        raw["master_seed"] = int(overrides["seed"])
    sweep = dict(raw.get("sweep", {}))
    if overrides.get("eta") is not None:
        sweep["etas"] = [float(overrides["eta"])]
    if overrides.get("s_attack") is not None:
        sweep["s_attack"] = [int(overrides["s_attack"])]
    if overrides.get("s_infer") is not None:
        sweep["s_infer"] = [int(overrides["s_infer"])]
    if overrides.get("workers") is not None:
        sweep["workers"] = int(overrides["workers"])
    ds = dict(raw["dataset"])
    ds.setdefault("seed", raw.get("master_seed", 0))
    if "centers" in ds and ds["centers"] is not None:
        ds["centers"] = tuple(tuple(c) for c in ds["centers"])
    attack = raw.get("attack", {})
    box = sweep.get("box", [0.0, 1.0])
    return ExperimentConfig(
        dataset=DatasetSpec(**ds),
        model=dict(raw["model"]),
        attack_method=attack.get("method", "fgm_l2"),
        attack_loss=attack.get("loss", "cross_entropy"),
        etas=tuple(float(e) for e in sweep["etas"]),
        s_attack_grid=tuple(int(s) for s in sweep["s_attack"]),
        s_infer_grid=tuple(int(s) for s in sweep["s_infer"]),
        n_points=int(sweep["n_points"]),
        repeats=int(sweep.get("repeats", 5)),
        master_seed=int(raw.get("master_seed", 0)),
        smooth_l=sweep.get("smooth_l"),
        box=None if box is None else (float(box[0]), float(box[1])),
        workers=int(sweep.get("workers", 1)),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    return config_from_dict(json.loads(p.read_text()), overrides)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Round-trippable resolved-config echo (provenance record)."""
    return {
        "version": CONFIG_VERSION,
        "master_seed": config.master_seed,
        "dataset": asdict(config.dataset),
        "model": config.model,
        "attack": {"method": config.attack_method, "loss": config.attack_loss},
        "sweep": {
            "etas": list(config.etas),
            "s_attack": list(config.s_attack_grid),
            "s_infer": list(config.s_infer_grid),
            "n_points": config.n_points,
            "repeats": config.repeats,
            "smooth_l": config.smooth_l,
            "box": None if config.box is None else list(config.box),
            "workers": config.workers,
        },
    }


def build_model(config: ExperimentConfig, data: Dataset) -> StochasticModel:
    """Construct (and, for MLPs, train) the model a config describes.

    MLPs train on the points after the first n_points; the leading points
    are the evaluation set.
    """
    spec = dict(config.model)
    kind = spec.get("kind", "mlp")
    if kind == "linear_gaussian":
        mu_b = spec.get("mu_b")
        return make_linear_gaussian(
            n_classes=int(spec["n_classes"]),
            dim=int(spec["dim"]),
            mu_w=np.asarray(spec["mu_w"], dtype=np.float64),
            sigma_w=float(spec["sigma_w"]),
            mu_b=None if mu_b is None else np.asarray(mu_b, dtype=np.float64),
        )
    if kind != "mlp":
        raise ValueError(f"unknown model kind {kind!r}")
    if data.n <= config.n_points:
        raise ValueError("dataset leaves no training points after the eval split")
    from .numerics import Architecture

    arch = Architecture(
        (data.dim, *[int(h) for h in spec.get("hidden", [32, 32])], int(data.labels.max()) + 1),
        activation=spec.get("activation", "relu"),
        output="softmax",
    )
    noise_spec = spec.get("noise", {"kind": "none"})
    noise = NoiseSpec(
        noise_spec.get("kind", "none"),
        sigma_w=float(noise_spec.get("sigma_w", 0.0)),
        dropout_p=float(noise_spec.get("dropout_p", 0.0)),
    )
    topts = spec.get("train", {})
    opts = TrainOptions(
        epochs=int(topts.get("epochs", 200)),
        lr=float(topts.get("lr", 0.5)),
        batch_size=int(topts.get("batch_size", 64)),
        noisy_copies=int(topts.get("noisy_copies", 0)),
        sigma_train=float(topts.get("sigma_train", 0.0)),
    )
    result = train(
        arch,
        data.inputs[config.n_points :],
        data.labels[config.n_points :],
        opts,
        split_seed(Seed(config.master_seed), "train"),
        noise=noise,
        input_noise=float(spec.get("input_noise", 0.0)),
    )
    scale = float(spec.get("weight_scale", 1.0))
    model = result.model
    if scale != 1.0:
        model = StochasticModel(
            arch=model.arch,
            base_params=scale * model.base_params,
            noise=model.noise,
            input_noise=model.input_noise,
        )
    return model


def resolve_smooth_l(
    config: ExperimentConfig, model: StochasticModel, data: Dataset
) -> float:
    """Config value, or a seeded empirical estimate over the data box."""
    if config.smooth_l is not None:
        return float(config.smooth_l)
    probe = sample_params(
        model, split_seed(Seed(config.master_seed), "lipschitz-set"), 8
    )
    return empirical_lipschitz(
        model,
        (data.inputs.min(axis=0), data.inputs.max(axis=0)),
        n_pairs=512,
        seed=split_seed(Seed(config.master_seed), "lipschitz"),
        sample_set=probe,
    )


def _run_cell(
    model: StochasticModel,
    eval_inputs: np.ndarray,
    eval_labels: np.ndarray,
    eta: float,
    s_attack: int,
    s_infer: int,
    repeat: int,
    rep_seed: Seed,
    config: ExperimentConfig,
    smooth_l: float,
) -> ExperimentRecord:
    spec = AttackSpec(
        method=config.attack_method,
        eta=eta,
        loss=config.attack_loss,
        s_attack=s_attack,
        box=config.box,
    )
    n = eval_inputs.shape[0]
    clean = adv = lin_ok = smooth_ok = skipped = 0
    lengths = np.empty(n)
    cosines: list[float] = []
    grad_norms: list[float] = []
    for i in range(n):
        x, y = eval_inputs[i], int(eval_labels[i])
        infer_set = sample_params(
            model, split_seed(rep_seed, "infer", i), s_infer, role="inference"
        )
        clean_ok = mc_predict(model, x, infer_set).predicted_class == y
        clean += clean_ok
        result = run_attack(model, x, y, spec, split_seed(rep_seed, "attack", i))
        lengths[i] = result.realized_norm
        adv += mc_predict(model, x + result.delta, infer_set).predicted_class == y
        if not clean_ok or result.realized_norm == 0.0:
            skipped += 1
            if clean_ok:  # vanished attack leaves the clean prediction intact
                lin_ok += 1
                smooth_ok += 1
            continue
        cert = linear_certificate(model, x, y, infer_set, result.delta)
        scert = smooth_certificate(model, x, y, infer_set, result.delta, smooth_l)
        lin_ok += cert.certified
        smooth_ok += scert.certified
        j = cert.min_r_class()
        cond = next(c for c in cert.per_class if c.label == j)
        if not math.isnan(cond.cosine):
            cosines.append(cond.cosine)
            grad_norms.append(cond.grad_norm)
    return ExperimentRecord(
        eta=eta,
        s_attack=s_attack,
        s_infer=s_infer,
        repeat=repeat,
        clean_acc=clean / n,
        adv_acc=adv / n,
        eff_len=float(np.mean(lengths)),
        mean_cos=float(np.mean(cosines)) if cosines else math.nan,
        mean_grad_norm=float(np.mean(grad_norms)) if grad_norms else math.nan,
        cert_lin=lin_ok / n,
        cert_smooth=smooth_ok / n,
        skipped=skipped,
    )


def run_sweep(config: ExperimentConfig, model: StochasticModel | None = None):
    """Execute the full grid; returns (records, resolved_config_dict)."""
    data = gen_dataset(config.dataset)
    if model is None:
        model = build_model(config, data)
    eval_inputs = data.inputs[: config.n_points]
    eval_labels = data.labels[: config.n_points]
    if eval_inputs.shape[0] < config.n_points:
        raise ValueError("dataset smaller than n_points")
    smooth_l = resolve_smooth_l(config, model, data)
    master = Seed(config.master_seed)
    cells = list(product(config.etas, config.s_attack_grid, config.s_infer_grid))
    tasks = []
    for ci, (eta, s_a, s_i) in enumerate(cells):
        cell_seed = split_seed(master, "cell", ci)
        for r in range(config.repeats):
            tasks.append(
                (eta, s_a, s_i, r, split_seed(cell_seed, "rep", r))
            )

    def run_one(task):
        eta, s_a, s_i, r, rep_seed = task
        try:
            return _run_cell(
                model, eval_inputs, eval_labels, eta, s_a, s_i, r, rep_seed,
                config, smooth_l,
            )
        except Exception as exc:
            raise RuntimeError(
                f"sweep cell failed at eta={eta} s_attack={s_a} "
                f"s_infer={s_i} repeat={r}: {exc}"
            ) from exc

    if config.workers == 1:
        records = [run_one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(run_one, tasks))
    resolved = config_to_dict(config)
    resolved["sweep"]["smooth_l"] = smooth_l
    return records, resolved


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(records, fmt: str, path) -> None:
    """Write records as CSV (fixed column order) or JSON; floats use repr,
    which round-trips float64 exactly."""
    if not records:
        raise ValueError("no records to emit")
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for rec in records:
            d = asdict(rec)
            lines.append(",".join(_format_value(d[col]) for col in CSV_COLUMNS))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        path.write_text(json.dumps([asdict(r) for r in records], indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_records(path) -> list[ExperimentRecord]:
    """Parse an emitted CSV back into records (exact float round-trip)."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header in {path}")
    out = []
    for line in text[1:]:
        vals = line.split(",")
        row = dict(zip(CSV_COLUMNS, vals))
        out.append(
            ExperimentRecord(
                eta=float(row["eta"]),
                s_attack=int(row["s_attack"]),
                s_infer=int(row["s_infer"]),
                repeat=int(row["repeat"]),
                clean_acc=float(row["clean_acc"]),
                adv_acc=float(row["adv_acc"]),
                eff_len=float(row["eff_len"]),
                mean_cos=float(row["mean_cos"]),
                mean_grad_norm=float(row["mean_grad_norm"]),
                cert_lin=float(row["cert_lin"]),
                cert_smooth=float(row["cert_smooth"]),
                skipped=int(row["skipped"]),
            )
        )
    return out


def svg_scatter(points, labels, path, size: int = 360) -> None:
    """Tiny cosmetic SVG scatter of a 2-D labeled dataset."""
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    pad = 10
    for (px, py), lab in zip(points[:, :2], labels):
        cx = pad + px * (size - 2 * pad)
        cy = size - (pad + py * (size - 2 * pad))
        color = palette[int(lab) % len(palette)]
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2.5" fill="{color}"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
