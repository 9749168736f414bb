"""Closed-form robustness conditions for Monte-Carlo predictions.

Given a perturbation computed on one realization set and an inference
prediction built from another, the linear certificate decides exactly (for
linear discriminants) whether the inference prediction survives the attack;
the smooth variant is a sufficient condition for gradient-Lipschitz
discriminants. Both reduce per competing class to the margin at the clean
point, the margin-gradient norm, and the alignment cosine between that
gradient and the perturbation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .attacks import AttackSpec, run_attack
from .models import (
    SampleSet,
    SmoothedModel,
    StochasticModel,
    batch_input_grads,
    batch_logits,
    mc_margin_gradient,
    mc_output_gradient,
    mc_predict,
    sample_params,
    scores_batch,
)
from .numerics import Seed, seed_rng, softmax, split_seed

CERTIFIED = "certified_robust"
NOT_CERTIFIED = "not_certified"

_DEGENERATE_GRAD = 1e-300


def cosine_alignment(g, delta) -> float:
    """Cosine between a margin gradient and a perturbation, clamped to [-1, 1]."""
    g = np.asarray(g, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    gg = float(np.dot(g, g))
    dd = float(np.dot(delta, delta))
    if gg == 0.0 or dd == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.clip(float(np.dot(g, delta)) / math.sqrt(gg * dd), -1.0, 1.0))


def r_linear(margin: float, directional_derivative: float) -> float:
    """Directional boundary distance for a linear discriminant margin.

    ``directional_derivative`` is grad_norm * cosine, i.e. the derivative of
    the margin along the unit attack direction. Non-negative values mean the
    margin never shrinks along the attack ray.
    """
    if directional_derivative >= 0.0:
        return math.inf
    return -margin / directional_derivative


def r_smooth(
    margin: float, directional_derivative: float, smooth_l: float, delta_norm: float
) -> float:
    """Sufficient boundary distance under an L-smoothness budget."""
    v = directional_derivative - smooth_l * delta_norm
    if v >= 0.0:
        return math.inf
    return margin / abs(v)


@dataclass(frozen=True)
class ClassCondition:
    """Per-competing-class certificate ingredients."""

    label: int
    margin: float
    grad_norm: float
    cosine: float  # nan when the margin gradient vanishes
    r_value: float
    v_value: float | None = None  # smooth variant only


@dataclass(frozen=True)
class Certificate:
    kind: str  # "linear" | "smooth"
    label: int
    per_class: tuple[ClassCondition, ...]
    r_min: float
    delta_norm: float
    verdict: str
    smooth_l: float | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def certified_against(self, target: int) -> bool:
        """Targeted variant: only the boundary toward ``target`` matters."""
        for cond in self.per_class:
            if cond.label == target:
                return cond.r_value > self.delta_norm
        raise ValueError(f"class {target} not in certificate")

    def min_r_class(self) -> int:
        """Competing class attaining r_min (smallest label on ties)."""
        best = None
        for cond in self.per_class:
            if best is None or cond.r_value < best.r_value:
                best = cond
        return best.label


def _certificate(
    model: StochasticModel,
    x,
    y: int,
    infer_set: SampleSet,
    delta,
    smooth_l: float | None,
) -> Certificate:
    x = np.ascontiguousarray(x, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    delta_norm = float(np.linalg.norm(delta))
    if delta_norm <= 0.0:
        raise ValueError("perturbation must be nonzero")
    if smooth_l is not None and smooth_l < 0:
        raise ValueError("smoothness constant must be >= 0")
    pred = mc_predict(model, x, infer_set)
    if pred.predicted_class != y:
        raise ValueError(
            f"certificate hypothesis violated: inference set predicts "
            f"{pred.predicted_class}, not {y}"
        )
    unit = delta / delta_norm
    conditions = []
    r_min = math.inf
    for c in range(model.n_classes):
        if c == y:
            continue
        margin = float(pred.mean_scores[y] - pred.mean_scores[c])
        grad = mc_margin_gradient(model, x, infer_set, y, c)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < _DEGENERATE_GRAD:
            # constant margin along every direction: certifiable iff positive
            if margin > 0.0:
                cosine = math.nan
                dd = 0.0
            else:
                raise ValueError(
                    f"class {c}: zero margin gradient with non-positive margin"
                )
        else:
            cosine = float(np.clip(float(np.dot(grad, unit)) / grad_norm, -1.0, 1.0))
            dd = grad_norm * cosine
        if smooth_l is None:
            r_value = r_linear(margin, dd)
            v_value = None
        else:
            r_value = r_smooth(margin, dd, smooth_l, delta_norm)
            v_value = dd - smooth_l * delta_norm
        conditions.append(
            ClassCondition(
                label=c,
                margin=margin,
                grad_norm=grad_norm,
                cosine=cosine,
                r_value=r_value,
                v_value=v_value,
            )
        )
        r_min = min(r_min, r_value)
    return Certificate(
        kind="linear" if smooth_l is None else "smooth",
        label=y,
        per_class=tuple(conditions),
        r_min=r_min,
        delta_norm=delta_norm,
        verdict=CERTIFIED if r_min > delta_norm else NOT_CERTIFIED,
        smooth_l=smooth_l,
    )


def linear_certificate(
    model: StochasticModel, x, y: int, infer_set: SampleSet, delta
) -> Certificate:
    """Exact (necessary and sufficient) condition for linear discriminants."""
    return _certificate(model, x, y, infer_set, delta, smooth_l=None)


def smooth_certificate(
    model: StochasticModel, x, y: int, infer_set: SampleSet, delta, smooth_l: float
) -> Certificate:
    """Sufficient condition for L-smooth discriminants (never necessary)."""
    return _certificate(model, x, y, infer_set, delta, smooth_l=smooth_l)


def deterministic_scores(model: StochasticModel, x) -> np.ndarray:
    """Scores of the base parameters (no sampling)."""
    base_set = SampleSet(
        params=model.base_params[None, :], seed=Seed(0), role="generic"
    )
    return scores_batch(model, x, base_set)[0]


def deterministic_distance(model: StochasticModel, x, y: int) -> float:
    """Minimal distance to the decision boundary of a noise-free model.

    For linear discriminants this is exact: the decision region is the
    polyhedron of non-negative margins, and the nearest face over all
    competing classes is margin_c / ||grad margin_c||. For k = 2 this is
    the classic margin-over-gradient-norm distance.
    """
    if not model.is_deterministic():
        raise ValueError("deterministic distance needs a noise-free model")
    scores = deterministic_scores(model, x)
    if int(np.argmax(scores)) != y:
        raise ValueError("point must be classified correctly")
    base_set = SampleSet(
        params=model.base_params[None, :], seed=Seed(0), role="generic"
    )
    best = math.inf
    for c in range(model.n_classes):
        if c == y:
            continue
        margin = float(scores[y] - scores[c])
        grad = mc_margin_gradient(model, x, base_set, y, c)
        denom = float(np.linalg.norm(grad))
        if denom == 0.0:
            continue  # constant margin: that boundary is unreachable
        best = min(best, margin / denom)
    if best == math.inf:
        warnings.warn("all margin gradients vanish; boundary is unreachable")
    return best


LINE_SEARCH_GRID = 2048
LINE_SEARCH_BISECTIONS = 60


def boundary_line_search(
    model: StochasticModel,
    x,
    y: int,
    infer_set: SampleSet,
    direction,
    t_max: float,
) -> float | None:
    """First label flip of the inference prediction along a ray from x.

    Brackets on a fixed grid, then bisects; returns None when no flip occurs
    within t_max. This is the ground-truth oracle the certificates are
    checked against.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    nrm = float(np.linalg.norm(direction))
    if nrm == 0.0:
        raise ValueError("direction must be nonzero")
    unit = direction / nrm

    def flips(t: float) -> bool:
        return mc_predict(model, x + t * unit, infer_set).predicted_class != y

    lo = 0.0
    hi = None
    for i in range(1, LINE_SEARCH_GRID + 1):
        t = t_max * i / LINE_SEARCH_GRID
        if flips(t):
            hi = t
            break
        lo = t
    if hi is None:
        return None
    for _ in range(LINE_SEARCH_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if flips(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class RobustnessEstimate:
    p_hat: float
    ci95: float
    n_trials: int
    n_misclassified: int
    n_zero_delta: int


def robustness_probability(
    model: StochasticModel,
    x,
    y: int,
    attack_spec: AttackSpec,
    s_attack: int,
    s_infer: int,
    n_trials: int,
    seed: Seed,
    smooth_l: float | None = None,
) -> RobustnessEstimate:
    """Monte-Carlo estimate of P(certificate holds) over independent
    (attack set, inference set) pairs, with a binomial 95% interval.

    Trials where the inference set misclassifies x count as not robust;
    trials with a vanished attack (zero perturbation) count as robust.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
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
    hits = 0
    n_mis = 0
    n_zero = 0
    for trial in range(n_trials):
        trial_seed = split_seed(seed, "trial", trial)
        result = run_attack(model, x, y, spec, split_seed(trial_seed, "attack"))
        infer_set = sample_params(
            model, split_seed(trial_seed, "infer"), s_infer, role="inference"
        )
        pred = mc_predict(model, x, infer_set)
        if pred.predicted_class != y:
            n_mis += 1
            continue
        if result.realized_norm == 0.0:
            n_zero += 1
            hits += 1
            continue
        cert = _certificate(model, x, y, infer_set, result.delta, smooth_l)
        if cert.certified:
            hits += 1
    p_hat = hits / n_trials
    ci95 = 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / n_trials)
    return RobustnessEstimate(
        p_hat=p_hat,
        ci95=ci95,
        n_trials=n_trials,
        n_misclassified=n_mis,
        n_zero_delta=n_zero,
    )


def _mean_class_grads_model(
    model: StochasticModel, sset: SampleSet, x: np.ndarray
) -> np.ndarray:
    """(k, d) gradients of every set-mean discriminant at x."""
    return np.stack(
        [mc_output_gradient(model, x, sset, c) for c in range(model.n_classes)]
    )


def _mean_class_grads_smoothed(
    sm: SmoothedModel, sset: SampleSet, eps: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """(k, d) gradients of the smoothed mean discriminants at x.

    Averages per-realization, per-shift gradients with common noise draws;
    the inner batched path evaluates all shifted copies at once.
    """
    arch = sm.inner.arch
    k = sm.inner.n_classes
    pts = x[None, :] + eps  # (m, d)
    total = np.zeros((k, x.shape[0]))
    for s in range(sset.size):
        theta = sset.params[s]
        inputs = pts if sset.input_offsets is None else pts + sset.input_offsets[s]
        logits = batch_logits(arch, theta, inputs)
        if arch.output == "softmax":
            probs = softmax(logits)
        for c in range(k):
            if arch.output == "softmax":
                e = np.zeros(k)
                e[c] = 1.0
                gout = probs * (e[None, :] - probs[:, c][:, None])
            else:
                gout = np.zeros_like(logits)
                gout[:, c] = 1.0
            grads = batch_input_grads(arch, theta, inputs, gout)  # (m, d)
            total[c] += grads.mean(axis=0)
    return total / sset.size


def empirical_lipschitz(
    model,
    region: tuple,
    n_pairs: int,
    seed: Seed,
    sample_set: SampleSet | None = None,
) -> float:
    """Max sampled gradient-difference ratio over random point pairs.

    A lower bound on the true smoothness constant of the (set-mean, or
    smoothed set-mean) discriminants. ``model`` is a StochasticModel or a
    SmoothedModel; the realization set fixes which mean function is probed.
    Pairs closer than 1e-12 are skipped.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    lo, hi = region
    smoothed = isinstance(model, SmoothedModel)
    inner = model.inner if smoothed else model
    dim = inner.in_dim
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (dim,))
    rng = seed_rng(split_seed(seed, "pairs"))
    if sample_set is None:
        sample_set = SampleSet(
            params=inner.base_params[None, :], seed=Seed(0), role="generic"
        )
    eps = None
    if smoothed:
        eps_rng = seed_rng(split_seed(seed, "smoothing"))
        eps = model.sigma * eps_rng.standard_normal((model.m_noise, dim))

    def grads_at(pt: np.ndarray) -> np.ndarray:
        if smoothed:
            return _mean_class_grads_smoothed(model, sample_set, eps, pt)
        return _mean_class_grads_model(inner, sample_set, pt)

    best = 0.0
    for _ in range(n_pairs):
        x1 = lo + (hi - lo) * rng.random(dim)
        x2 = lo + (hi - lo) * rng.random(dim)
        dist = float(np.linalg.norm(x1 - x2))
        if dist < 1e-12:
            continue
        g1 = grads_at(x1)
        g2 = grads_at(x2)
        ratio = float(np.max(np.linalg.norm(g1 - g2, axis=1))) / dist
        best = max(best, ratio)
    return best
