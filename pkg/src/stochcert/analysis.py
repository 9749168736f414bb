"""Statistical analyses of stochastic-classifier robustness factors:
prediction variance, margin-gradient norms with Gaussian norm bounds,
attack/inference alignment angles, extreme-prediction counting, and the
1/S variance-scaling check.

Skipped points (misclassified, vanished attack, degenerate gradient) are
always tallied explicitly; they materially change the aggregate picture and
must never be dropped silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attacks import AttackSpec, run_attack
from .certify import linear_certificate
from .models import (
    StochasticModel,
    mc_margin_gradient,
    mc_predict,
    sample_params,
    scores_batch,
)
from .numerics import Seed, split_seed


def summary_stats(values) -> dict:
    """Five-number-ish summary used by every report's JSON block."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return {"mean": math.nan, "median": math.nan, "q25": math.nan,
                "q75": math.nan, "n": 0}
    return {
        "mean": float(np.mean(values)),
        "median": float(np.median(values)),
        "q25": float(np.quantile(values, 0.25)),
        "q75": float(np.quantile(values, 0.75)),
        "n": int(values.size),
    }


def paired_one_sided_p(a, b) -> float:
    """P-value for H1: mean(a - b) < 0, via a paired z-test.

    Normal approximation on the per-pair differences; adequate for the
    multi-hundred-point comparisons used here.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two equally sized samples")
    diff = a - b
    sd = float(np.std(diff, ddof=1))
    if sd == 0.0:
        return 1.0 if float(np.mean(diff)) >= 0 else 0.0
    z = float(np.mean(diff)) / (sd / math.sqrt(diff.size))
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


# --- prediction variance ------------------------------------------------------


@dataclass(frozen=True)
class VarianceReport:
    per_point_variance: np.ndarray
    n_mc: int
    summary: dict


def prediction_variance(
    model: StochasticModel, inputs, labels, n_mc: int, seed: Seed
) -> VarianceReport:
    """Empirical variance of the true-class score across realizations.

    Uses the population (1/N) form, matching the usual running-estimate
    convention, so tests can pin values exactly. Constant score samples
    (deterministic models) give exactly zero rather than squared-ulp noise.
    """
    if n_mc < 2:
        raise ValueError("n_mc must be >= 2")
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    variances = np.empty(inputs.shape[0])
    for i in range(inputs.shape[0]):
        sset = sample_params(model, split_seed(seed, "variance", i), n_mc)
        scores = scores_batch(model, inputs[i], sset)[:, labels[i]]
        if np.ptp(scores) == 0.0:
            variances[i] = 0.0
        else:
            variances[i] = float(np.var(scores))  # population form
    return VarianceReport(
        per_point_variance=variances, n_mc=n_mc, summary=summary_stats(variances)
    )


# --- gradient norms -----------------------------------------------------------


def prop_norm_bounds(mu, cov_diag) -> tuple[float, float]:
    """(||mu||, sqrt(||mu||^2 + tr Sigma)): strict bounds on E||X|| for a
    Gaussian X with mean mu and diagonal covariance, when tr Sigma > 0."""
    mu = np.asarray(mu, dtype=np.float64)
    cov_diag = np.asarray(cov_diag, dtype=np.float64)
    lower = float(np.linalg.norm(mu))
    upper = math.sqrt(lower * lower + float(np.sum(cov_diag)))
    return lower, upper


@dataclass(frozen=True)
class GradientStats:
    mean_vector: np.ndarray
    cov_diag: np.ndarray
    norm_samples: np.ndarray
    lower_bound: float
    upper_bound: float
    summary: dict


def gradient_norm_stats(
    model: StochasticModel,
    x,
    y: int,
    c: int,
    s_infer: int,
    n_repeats: int,
    seed: Seed,
) -> GradientStats:
    """Margin-gradient norms across independent inference sets of one size.

    Estimates the mean gradient and its diagonal covariance from the
    repeats and reports the Gaussian norm bounds they imply.
    """
    if n_repeats < 2:
        raise ValueError("n_repeats must be >= 2")
    grads = np.empty((n_repeats, model.in_dim))
    for r in range(n_repeats):
        sset = sample_params(
            model, split_seed(seed, "repeat", r), s_infer, role="inference"
        )
        grads[r] = mc_margin_gradient(model, x, sset, y, c)
    norms = np.linalg.norm(grads, axis=1)
    mean_vec = grads.mean(axis=0)
    cov_diag = grads.var(axis=0)  # population form, matching the variance report
    lower, upper = prop_norm_bounds(mean_vec, cov_diag)
    return GradientStats(
        mean_vector=mean_vec,
        cov_diag=cov_diag,
        norm_samples=norms,
        lower_bound=lower,
        upper_bound=upper,
        summary=summary_stats(norms),
    )


# --- alignment angles ---------------------------------------------------------


@dataclass(frozen=True)
class AngleReport:
    cosines: np.ndarray
    skipped_misclassified: int
    skipped_zero_delta: int
    skipped_degenerate: int
    summary: dict


def angle_distribution(
    model: StochasticModel,
    inputs,
    labels,
    attack_spec: AttackSpec,
    s_attack: int,
    s_infer: int,
    seed: Seed,
    attack_fn=None,
) -> AngleReport:
    """Alignment cosine of the tightest-certificate class, per test point.

    For every point: a fresh attack-side perturbation, a fresh inference
    set, then the cosine recorded for the class minimizing the directional
    boundary distance. ``attack_fn(x, y, seed) -> delta`` overrides the
    attack (test hook for injected directions).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    spec = attack_spec
    if spec.s_attack != s_attack:
        spec = AttackSpec(
            method=spec.method,
            eta=spec.eta,
            loss=spec.loss,
            s_attack=s_attack,
            pgd_steps=spec.pgd_steps,
            pgd_nu=spec.pgd_nu,
            box=spec.box,
            target=spec.target,
            resample_per_step=spec.resample_per_step,
        )
    cosines = []
    n_mis = n_zero = n_degen = 0
    for i in range(inputs.shape[0]):
        x, y = inputs[i], int(labels[i])
        infer_set = sample_params(
            model, split_seed(seed, "infer", i), s_infer, role="inference"
        )
        if mc_predict(model, x, infer_set).predicted_class != y:
            n_mis += 1
            continue
        if attack_fn is not None:
            delta = np.asarray(attack_fn(x, y, split_seed(seed, "attack", i)))
        else:
            delta = run_attack(model, x, y, spec, split_seed(seed, "attack", i)).delta
        if float(np.linalg.norm(delta)) == 0.0:
            n_zero += 1
            continue
        cert = linear_certificate(model, x, y, infer_set, delta)
        j = cert.min_r_class()
        cos = next(c.cosine for c in cert.per_class if c.label == j)
        if math.isnan(cos):
            n_degen += 1
            continue
        cosines.append(cos)
    cosines = np.asarray(cosines)
    return AngleReport(
        cosines=cosines,
        skipped_misclassified=n_mis,
        skipped_zero_delta=n_zero,
        skipped_degenerate=n_degen,
        summary=summary_stats(cosines),
    )


# --- extreme predictions ------------------------------------------------------


@dataclass(frozen=True)
class ExtremeCount:
    count: int
    fraction: float
    flags: np.ndarray


def extreme_prediction_count(
    model: StochasticModel, inputs, threshold: float, seed: Seed
) -> ExtremeCount:
    """Points whose single-realization top score reaches the threshold.

    One realization per point; softmax scores at (or numerically at) one
    have zero loss gradient and silently weaken multi-sample attacks.
    """
    if not 0.5 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0.5, 1]")
    inputs = np.asarray(inputs, dtype=np.float64)
    flags = np.zeros(inputs.shape[0], dtype=bool)
    for i in range(inputs.shape[0]):
        sset = sample_params(model, split_seed(seed, "extreme", i), 1)
        scores = scores_batch(model, inputs[i], sset)[0]
        flags[i] = bool(np.max(scores) >= threshold)
    count = int(flags.sum())
    return ExtremeCount(
        count=count, fraction=count / max(len(flags), 1), flags=flags
    )


# --- variance scaling ---------------------------------------------------------


@dataclass(frozen=True)
class CltFit:
    slope: float
    r_squared: float
    slope_se: float
    sizes: tuple[int, ...]
    variances: np.ndarray


def clt_scaling_check(
    model: StochasticModel,
    x,
    size_grid,
    n_repeats: int,
    seed: Seed,
    class_index: int | None = None,
) -> CltFit:
    """Regress log Var(mean score over S draws) on log S.

    The mean over S realizations has variance Sigma/S, so the slope is -1
    for any genuinely stochastic model. Deterministic models have no
    variance to scale and raise.
    """
    sizes = sorted(set(int(s) for s in size_grid))
    if len(sizes) < 4:
        raise ValueError("need at least 4 distinct set sizes")
    if n_repeats < 50:
        raise ValueError("need at least 50 repeats per size")
    x = np.asarray(x, dtype=np.float64)
    if class_index is None:
        ref = sample_params(model, split_seed(seed, "reference"), 256)
        class_index = mc_predict(model, x, ref).predicted_class
    variances = np.empty(len(sizes))
    for si, s in enumerate(sizes):
        means = np.empty(n_repeats)
        for r in range(n_repeats):
            sset = sample_params(model, split_seed(seed, f"size{s}", r), s)
            means[r] = float(
                scores_batch(model, x, sset)[:, class_index].mean()
            )
        variances[si] = float(np.var(means))
    if np.any(variances == 0.0):
        raise ValueError("CLT check undefined for a deterministic model")
    lx = np.log(np.asarray(sizes, dtype=np.float64))
    ly = np.log(variances)
    n = len(sizes)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    slope_se = math.sqrt(ss_res / max(n - 2, 1) / sxx)
    return CltFit(
        slope=slope,
        r_squared=r_squared,
        slope_se=slope_se,
        sizes=tuple(sizes),
        variances=variances,
    )
