"""Command-line interface.

Subcommands: gen-data, train, attack, certify, sweep, analyze. Each reads a
JSON config file (see README for the schema); --eta/--s-attack/--s-infer/
--seed override the file values. Exit code 0 on success, 1 with a one-line
diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    angle_distribution,
    clt_scaling_check,
    extreme_prediction_count,
    prediction_variance,
)
from .attacks import AttackSpec, effective_length, run_attack
from .certify import linear_certificate, smooth_certificate
from .datasets import gen_dataset
from .harness import (
    build_model,
    emit,
    load_config,
    run_sweep,
    svg_scatter,
)
from .models import load_model, mc_predict, sample_params, save_model
from .numerics import Seed, split_seed


def _overrides(args) -> dict:
    return {
        "eta": getattr(args, "eta", None),
        "s_attack": getattr(args, "s_attack", None),
        "s_infer": getattr(args, "s_infer", None),
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
    }


def _load(args):
    return load_config(args.config, _overrides(args))


def _out_path(args, default: str) -> Path:
    out = Path(args.out) if args.out else Path(default)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _get_model(config, args, data):
    if getattr(args, "model", None):
        return load_model(args.model)
    return build_model(config, data)


def cmd_gen_data(args) -> int:
    config = _load(args)
    data = gen_dataset(config.dataset)
    out = _out_path(args, "dataset.csv")
    header = ",".join([f"x{j}" for j in range(data.dim)] + ["label"])
    lines = [header]
    for row, lab in zip(data.inputs, data.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(lab)}")
    out.write_text("\n".join(lines) + "\n")
    if args.svg:
        svg_scatter(data.inputs, data.labels, args.svg)
    print(f"wrote {data.n} points to {out}")
    return 0


def cmd_train(args) -> int:
    config = _load(args)
    data = gen_dataset(config.dataset)
    model = build_model(config, data)
    eval_x = data.inputs[: config.n_points]
    eval_y = data.labels[: config.n_points]
    sset = sample_params(
        model, split_seed(Seed(config.master_seed), "eval"), 32, role="inference"
    )
    correct = sum(
        mc_predict(model, eval_x[i], sset).predicted_class == eval_y[i]
        for i in range(len(eval_y))
    )
    out = _out_path(args, "model.json")
    save_model(model, out)
    print(f"saved checkpoint to {out} (eval accuracy {correct / len(eval_y):.3f})")
    return 0


def cmd_attack(args) -> int:
    config = _load(args)
    data = gen_dataset(config.dataset)
    model = _get_model(config, args, data)
    spec = AttackSpec(
        method=config.attack_method,
        eta=config.etas[0],
        loss=config.attack_loss,
        s_attack=config.s_attack_grid[0],
        box=config.box,
    )
    master = Seed(config.master_seed)
    s_infer = config.s_infer_grid[0]
    lines = ["point,eta,realized_norm,zero_gradient,clean_correct,adv_correct"]
    for i in range(config.n_points):
        x, y = data.inputs[i], int(data.labels[i])
        infer_set = sample_params(
            model, split_seed(master, "infer", i), s_infer, role="inference"
        )
        result = run_attack(model, x, y, spec, split_seed(master, "attack", i))
        clean = mc_predict(model, x, infer_set).predicted_class == y
        adv = mc_predict(model, x + result.delta, infer_set).predicted_class == y
        lines.append(
            f"{i},{repr(spec.eta)},{repr(effective_length(result))},"
            f"{int(result.zero_gradient)},{int(clean)},{int(adv)}"
        )
    out = _out_path(args, "attacks.csv")
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {config.n_points} attack rows to {out}")
    return 0


def cmd_certify(args) -> int:
    config = _load(args)
    data = gen_dataset(config.dataset)
    model = _get_model(config, args, data)
    spec = AttackSpec(
        method=config.attack_method,
        eta=config.etas[0],
        loss=config.attack_loss,
        s_attack=config.s_attack_grid[0],
        box=config.box,
    )
    master = Seed(config.master_seed)
    s_infer = config.s_infer_grid[0]
    smooth_l = config.smooth_l
    rows = []
    skipped = 0
    for i in range(config.n_points):
        x, y = data.inputs[i], int(data.labels[i])
        infer_set = sample_params(
            model, split_seed(master, "infer", i), s_infer, role="inference"
        )
        result = run_attack(model, x, y, spec, split_seed(master, "attack", i))
        if (
            mc_predict(model, x, infer_set).predicted_class != y
            or result.realized_norm == 0.0
        ):
            skipped += 1
            continue
        cert = linear_certificate(model, x, y, infer_set, result.delta)
        if smooth_l is not None:
            scert = smooth_certificate(
                model, x, y, infer_set, result.delta, smooth_l
            )
        row = {
            "point": i,
            "label": y,
            "delta_norm": cert.delta_norm,
            "r_min": cert.r_min,
            "verdict": cert.verdict,
            "margins": [c.margin for c in cert.per_class],
            "grad_norms": [c.grad_norm for c in cert.per_class],
            "cosines": [c.cosine for c in cert.per_class],
            "r_values": [c.r_value for c in cert.per_class],
        }
        if smooth_l is not None:
            row["v_values"] = [c.v_value for c in scert.per_class]
            row["smooth_verdict"] = scert.verdict
        rows.append(row)
    out = _out_path(args, "certificates.json")
    out.write_text(json.dumps({"skipped": skipped, "rows": rows}, indent=1))
    print(f"wrote {len(rows)} certificates to {out} ({skipped} skipped)")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    records, resolved = run_sweep(config)
    out_dir = Path(args.out) if args.out else Path("sweep-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    emit(records, "csv", out_dir / "records.csv")
    emit(records, "json", out_dir / "records.json")
    (out_dir / "resolved_config.json").write_text(json.dumps(resolved, indent=1))
    print(f"wrote {len(records)} records to {out_dir}")
    return 0


def cmd_analyze(args) -> int:
    config = _load(args)
    data = gen_dataset(config.dataset)
    model = _get_model(config, args, data)
    master = Seed(config.master_seed)
    eval_x = data.inputs[: config.n_points]
    eval_y = data.labels[: config.n_points]
    spec = AttackSpec(
        method=config.attack_method,
        eta=config.etas[0],
        loss=config.attack_loss,
        s_attack=config.s_attack_grid[0],
        box=config.box,
    )
    var_report = prediction_variance(
        model, eval_x, eval_y, n_mc=100, seed=split_seed(master, "variance")
    )
    angle_report = angle_distribution(
        model,
        eval_x,
        eval_y,
        spec,
        s_attack=config.s_attack_grid[0],
        s_infer=config.s_infer_grid[0],
        seed=split_seed(master, "angles"),
    )
    extreme = extreme_prediction_count(
        model, eval_x, threshold=1.0 - 1e-12, seed=split_seed(master, "extreme")
    )
    try:
        clt = clt_scaling_check(
            model,
            eval_x[0],
            (1, 2, 4, 8, 16, 32),
            n_repeats=80,
            seed=split_seed(master, "clt"),
        )
        clt_block = {"slope": clt.slope, "r_squared": clt.r_squared}
    except ValueError as exc:
        clt_block = {"error": str(exc)}
    payload = {
        "prediction_variance": var_report.summary,
        "angles": {
            **angle_report.summary,
            "skipped_misclassified": angle_report.skipped_misclassified,
            "skipped_zero_delta": angle_report.skipped_zero_delta,
        },
        "extreme_predictions": {
            "count": extreme.count,
            "fraction": extreme.fraction,
        },
        "clt_scaling": clt_block,
    }
    out = _out_path(args, "analysis.json")
    out.write_text(json.dumps(payload, indent=1))
    csv_out = out.with_suffix(".csv")
    lines = ["point,variance,extreme_flag"]
    for i in range(len(eval_y)):
        lines.append(
            f"{i},{repr(float(var_report.per_point_variance[i]))},"
            f"{int(extreme.flags[i])}"
        )
    csv_out.write_text("\n".join(lines) + "\n")
    print(f"wrote analysis to {out} and {csv_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochcert",
        description="Attack-vs-inference robustness analysis for stochastic classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_model=False):
        p.add_argument("-c", "--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--eta", type=float, help="override perturbation strength")
        p.add_argument("--s-attack", type=int, help="override attack sample count")
        p.add_argument("--s-infer", type=int, help="override inference sample count")
        p.add_argument("--out", help="output path")
        if with_model:
            p.add_argument("--model", help="model checkpoint to use instead of training")

    p = sub.add_parser("gen-data", help="generate a synthetic dataset CSV")
    add_common(p)
    p.add_argument("--svg", help="also write an SVG scatter plot")
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train the configured model, save a checkpoint")
    add_common(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("attack", help="attack the evaluation points")
    add_common(p, with_model=True)
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("certify", help="per-point robustness certificates")
    add_common(p, with_model=True)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("sweep", help="run the full experiment grid")
    add_common(p)
    p.add_argument("--workers", type=int, help="parallel cell workers")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("analyze", help="variance/angle/extreme/CLT summaries")
    add_common(p, with_model=True)
    p.set_defaults(fn=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
