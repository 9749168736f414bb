"""Stochastic classifiers as samplable random functions.

A model couples a network architecture with a base parameter vector and a
noise mechanism (additive Gaussian weight noise, MC dropout, or none).
Drawing a SampleSet materializes S parameter realizations; predictions and
gradients are Monte-Carlo means over one explicit realization set, so the
set used to build an attack and the set used at inference can differ.

Two analytic families are provided for exactness tests: linear-Gaussian
models (exactly linear discriminants) and quadratic models with a known
gradient-Lipschitz constant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernels import mlp_forward, mlp_vjp_input
from .numerics import (
    Architecture,
    Seed,
    seed_rng,
    softmax,
    split_seed,
)

NOISE_KINDS = ("none", "additive_gaussian", "dropout")
ROLES = ("attack", "inference", "generic")

CHECKPOINT_FORMAT = "stochcert-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NoiseSpec:
    """Parameter-noise mechanism applied when drawing realizations."""

    kind: str = "none"
    sigma_w: float = 0.0
    dropout_p: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "additive_gaussian" and self.sigma_w < 0:
            raise ValueError("sigma_w must be >= 0")
        if self.kind == "dropout" and not 0.0 < self.dropout_p < 1.0:
            raise ValueError("dropout_p must lie in (0, 1)")

    @staticmethod
    def none() -> "NoiseSpec":
        return NoiseSpec("none")

    @staticmethod
    def gaussian(sigma_w: float) -> "NoiseSpec":
        return NoiseSpec("additive_gaussian", sigma_w=sigma_w)

    @staticmethod
    def dropout(p: float) -> "NoiseSpec":
        return NoiseSpec("dropout", dropout_p=p)


def _frozen_array(arr, dtype=np.float64):
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StochasticModel:
    """A random classifier f(x, theta) with a sampler over theta.

    ``quad_forms`` (k, d, d) adds a fixed term x^T Q_c x to each output of a
    pure-linear logits architecture; the linear coefficients stay stochastic
    while the curvature, and hence the smoothness constant, is exact and
    shared by every realization.
    """

    arch: Architecture
    base_params: np.ndarray
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    input_noise: float = 0.0
    quad_forms: np.ndarray | None = None

    def __post_init__(self):
        params = _frozen_array(self.base_params)
        if params.shape != (self.arch.n_params,):
            raise ValueError(
                f"expected {self.arch.n_params} parameters, got {params.shape}"
            )
        if not np.all(np.isfinite(params)):
            raise ValueError("base parameters must be finite")
        object.__setattr__(self, "base_params", params)
        if self.input_noise < 0:
            raise ValueError("input_noise must be >= 0")
        if self.quad_forms is not None:
            q = _frozen_array(self.quad_forms)
            d, k = self.arch.in_dim, self.arch.n_classes
            if q.shape != (k, d, d):
                raise ValueError(f"quad_forms must have shape ({k}, {d}, {d})")
            if not np.allclose(q, np.swapaxes(q, 1, 2), atol=1e-12, rtol=0.0):
                raise ValueError("quad_forms must be symmetric")
            if len(self.arch.layer_sizes) != 2 or self.arch.output != "logits":
                raise ValueError(
                    "quad_forms require a pure-linear logits architecture"
                )
            object.__setattr__(self, "quad_forms", q)

    @property
    def in_dim(self) -> int:
        return self.arch.in_dim

    @property
    def n_classes(self) -> int:
        return self.arch.n_classes

    def is_deterministic(self) -> bool:
        if self.input_noise != 0.0:
            return False
        if self.noise.kind == "additive_gaussian":
            return self.noise.sigma_w == 0.0
        return self.noise.kind == "none"


@dataclass(frozen=True)
class SampleSet:
    """An explicit realization set {theta_1..theta_S} with provenance seed."""

    params: np.ndarray  # (S, H)
    seed: Seed
    role: str = "generic"
    input_offsets: np.ndarray | None = None  # (S, d) when input noise is active

    def __post_init__(self):
        params = _frozen_array(self.params)
        if params.ndim != 2 or params.shape[0] < 1:
            raise ValueError("params must be a (S, H) array with S >= 1")
        object.__setattr__(self, "params", params)
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.input_offsets is not None:
            off = _frozen_array(self.input_offsets)
            if off.shape[0] != params.shape[0]:
                raise ValueError("input_offsets must have one row per realization")
            object.__setattr__(self, "input_offsets", off)

    @property
    def size(self) -> int:
        return self.params.shape[0]


@dataclass(frozen=True)
class McPrediction:
    """Monte-Carlo prediction over one realization set."""

    mean_scores: np.ndarray
    per_sample_scores: np.ndarray
    predicted_class: int


@dataclass(frozen=True)
class SmoothedModel:
    """Gaussian-input smoothing wrapper; its gradient smoothness is at most
    2 / sigma^2, which the wrapper exposes as ``l_bound``."""

    inner: StochasticModel
    sigma: float
    m_noise: int = 10

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.m_noise < 1:
            raise ValueError("m_noise must be >= 1")

    @property
    def l_bound(self) -> float:
        return 2.0 / (self.sigma * self.sigma)


def sample_params(
    model: StochasticModel, seed: Seed, n_samples: int, role: str = "generic"
) -> SampleSet:
    """Draw n_samples parameter realizations; deterministic given the seed.

    Additive Gaussian noise perturbs every parameter (weights and biases)
    i.i.d.; dropout zeroes each hidden unit's outgoing weights with
    probability p and rescales survivors by 1/(1-p).
    """
    if n_samples < 1:
        raise ValueError("need at least one realization")
    rng = seed_rng(seed)
    base = model.base_params
    noise = model.noise
    if noise.kind == "none":
        params = np.tile(base, (n_samples, 1))
    elif noise.kind == "additive_gaussian":
        params = base + noise.sigma_w * rng.standard_normal(
            (n_samples, base.shape[0])
        )
    else:  # dropout
        params = np.tile(base, (n_samples, 1))
        sizes = model.arch.layer_sizes
        scale = 1.0 / (1.0 - noise.dropout_p)
        off = 0
        for layer in range(len(sizes) - 1):
            n_in, n_out = sizes[layer], sizes[layer + 1]
            w_block = params[:, off : off + n_out * n_in].reshape(
                n_samples, n_out, n_in
            )
            if layer > 0:  # units of hidden layer `layer` feed this weight block
                keep = rng.random((n_samples, n_in)) >= noise.dropout_p
                w_block *= scale * keep[:, None, :]
            off += n_out * n_in + n_out
    offsets = None
    if model.input_noise > 0:
        offsets = model.input_noise * rng.standard_normal(
            (n_samples, model.in_dim)
        )
    return SampleSet(params=params, seed=seed, role=role, input_offsets=offsets)


# --- batched scores and gradients over one realization set -----------------


def _effective_inputs(x: np.ndarray, sset: SampleSet) -> np.ndarray:
    """(1, d) shared input, or (S, d) per-realization inputs under input noise."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if sset.input_offsets is None:
        return x[None, :]
    return np.ascontiguousarray(x[None, :] + sset.input_offsets)


def _quad_term(quad_forms: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.einsum("bd,cde,be->bc", xs, quad_forms, xs)


def raw_scores_batch(model: StochasticModel, x, sset: SampleSet) -> np.ndarray:
    """Pre-output scores (logits) of every realization, shape (S, k)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (model.in_dim,):
        raise ValueError(f"expected input of shape ({model.in_dim},), got {x.shape}")
    xs = _effective_inputs(x, sset)
    z = mlp_forward(model.arch.sizes_arr, model.arch.act_id, sset.params, xs)
    if model.quad_forms is not None:
        z = z + _quad_term(model.quad_forms, xs)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite network output")
    return z


def scores_batch(model: StochasticModel, x, sset: SampleSet) -> np.ndarray:
    """Discriminant scores of every realization (softmax applied per sample)."""
    z = raw_scores_batch(model, x, sset)
    return softmax(z) if model.arch.output == "softmax" else z


def vjp_scores_batch(
    model: StochasticModel, x, sset: SampleSet, gout: np.ndarray
) -> np.ndarray:
    """Per-realization input gradient of <gout_s, raw_scores_s>, shape (S, d)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    xs = _effective_inputs(x, sset)
    gout = np.ascontiguousarray(gout, dtype=np.float64)
    g = mlp_vjp_input(model.arch.sizes_arr, model.arch.act_id, sset.params, xs, gout)
    if model.quad_forms is not None:
        if xs.shape[0] == 1:
            g = g + 2.0 * np.einsum("sc,cde,e->sd", gout, model.quad_forms, xs[0])
        else:
            g = g + 2.0 * np.einsum("sc,cde,se->sd", gout, model.quad_forms, xs)
    return g


def _output_seeds(model: StochasticModel, z: np.ndarray, direction: np.ndarray):
    """Per-realization logit seeds for d<direction, outputs>/d(logits)."""
    if model.arch.output == "softmax":
        p = softmax(z)
        return p * (direction[None, :] - (p @ direction)[:, None])
    return np.broadcast_to(direction, z.shape).copy()


def mc_predict(model: StochasticModel, x, sset: SampleSet) -> McPrediction:
    """Mean scores over the realization set; argmax breaks ties low."""
    per_sample = scores_batch(model, x, sset)
    mean = per_sample.mean(axis=0)
    return McPrediction(
        mean_scores=mean,
        per_sample_scores=per_sample,
        predicted_class=int(np.argmax(mean)),
    )


def mc_margin_gradient(
    model: StochasticModel, x, sset: SampleSet, y: int, c: int
) -> np.ndarray:
    """Gradient of the set-mean margin f_y - f_c with respect to x."""
    if y == c:
        raise ValueError("margin needs two distinct classes")
    k = model.n_classes
    direction = np.zeros(k)
    direction[y] = 1.0
    direction[c] = -1.0
    z = raw_scores_batch(model, x, sset)
    gout = _output_seeds(model, z, direction)
    return vjp_scores_batch(model, x, sset, gout).mean(axis=0)


def mc_output_gradient(
    model: StochasticModel, x, sset: SampleSet, c: int
) -> np.ndarray:
    """Gradient of the set-mean discriminant f_c with respect to x."""
    k = model.n_classes
    direction = np.zeros(k)
    direction[c] = 1.0
    z = raw_scores_batch(model, x, sset)
    gout = _output_seeds(model, z, direction)
    return vjp_scores_batch(model, x, sset, gout).mean(axis=0)


def _runner_up(scores: np.ndarray, label: int) -> int:
    masked = scores.copy()
    masked[label] = -np.inf
    return int(np.argmax(masked))


def mc_loss_gradient(
    model: StochasticModel,
    x,
    sset: SampleSet,
    loss: str,
    y: int,
    target: int | None = None,
) -> np.ndarray:
    """Ascent gradient of the attack objective on the set-mean prediction.

    Untargeted: gradient of loss(f^set(x), y). Targeted: gradient of
    -loss(f^set(x), target). cw_logits reads set-mean logits; its value is
    hinged at zero but the attack always ascends the active margin branch so
    saturated-but-correct points still receive a direction.
    """
    z = raw_scores_batch(model, x, sset)
    outputs = softmax(z) if model.arch.output == "softmax" else z
    mean_out = outputs.mean(axis=0)
    k = model.n_classes
    e = np.eye(k)

    if loss == "cross_entropy":
        if model.arch.output != "softmax":
            raise ValueError("cross-entropy attack needs softmax outputs")
        cls = y if target is None else target
        gout = _output_seeds(model, z, e[cls]) / sset.size
        raw = vjp_scores_batch(model, x, sset, gout).sum(axis=0)  # grad of mean f_cls
        nrm = float(np.linalg.norm(raw))
        if nrm == 0.0:
            return raw
        p_cls = float(mean_out[cls])
        g = raw / p_cls if target is not None else -raw / p_cls
    elif loss == "neg_margin":
        if target is None:
            c = _runner_up(mean_out, y)
            direction = e[c] - e[y]
        else:
            c = _runner_up(mean_out, target)
            direction = e[target] - e[c]
        gout = _output_seeds(model, z, direction) / sset.size
        g = vjp_scores_batch(model, x, sset, gout).sum(axis=0)
    elif loss == "cw_logits":
        mean_z = z.mean(axis=0)
        t = y if target is None else target
        i_star = _runner_up(mean_z, t)
        direction = (e[i_star] - e[t]) if target is None else (e[t] - e[i_star])
        gout = np.broadcast_to(direction / sset.size, z.shape)
        g = vjp_scores_batch(model, x, sset, gout).sum(axis=0)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite attack gradient")
    return g


def smooth_predict(
    sm: SmoothedModel,
    x,
    sset: SampleSet,
    noise_seed: Seed,
    eps: np.ndarray | None = None,
) -> McPrediction:
    """Average the inner prediction over m_noise Gaussian input shifts.

    The shift draws are shared across parameter realizations; ``eps``
    overrides them (test hook, shape (m, d)).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if eps is None:
        rng = seed_rng(noise_seed)
        eps = sm.sigma * rng.standard_normal((sm.m_noise, sm.inner.in_dim))
    else:
        eps = np.asarray(eps, dtype=np.float64)
    stacks = [scores_batch(sm.inner, x + eps[j], sset) for j in range(eps.shape[0])]
    per_sample = np.mean(stacks, axis=0)  # (S, k), averaged over shifts
    mean = per_sample.mean(axis=0)
    return McPrediction(
        mean_scores=mean,
        per_sample_scores=per_sample,
        predicted_class=int(np.argmax(mean)),
    )


# --- analytic test families -------------------------------------------------


def make_linear_gaussian(
    n_classes: int,
    dim: int,
    mu_w,
    sigma_w: float,
    mu_b=None,
) -> StochasticModel:
    """Linear logits f_c(x) = w_c . x + b_c with w, b ~ N(mu, sigma_w^2 I).

    Every realization has exactly linear discriminants, so the linear
    boundary certificate is exact on this family.
    """
    mu_w = np.asarray(mu_w, dtype=np.float64)
    if mu_w.shape != (n_classes, dim):
        raise ValueError(f"mu_w must have shape ({n_classes}, {dim})")
    if mu_b is None:
        mu_b = np.zeros(n_classes)
    arch = Architecture((dim, n_classes), activation="relu", output="logits")
    return StochasticModel(
        arch=arch,
        base_params=arch.pack([mu_w], [np.asarray(mu_b, dtype=np.float64)]),
        noise=NoiseSpec.gaussian(sigma_w),
    )


def make_quadratic(quad_forms, linear, noise: NoiseSpec) -> StochasticModel:
    """f_c(x) = x^T Q_c x + a_c . x with stochastic linear coefficients.

    The curvature is shared by all realizations, so every discriminant is
    L-smooth with the exact constant returned by quadratic_smoothness.
    """
    quad_forms = np.asarray(quad_forms, dtype=np.float64)
    linear = np.asarray(linear, dtype=np.float64)
    if linear.ndim != 2:
        raise ValueError("linear must be (k, d)")
    k, d = linear.shape
    arch = Architecture((d, k), activation="relu", output="logits")
    return StochasticModel(
        arch=arch,
        base_params=arch.pack([linear], [np.zeros(k)]),
        noise=noise,
        quad_forms=quad_forms,
    )


def quadratic_smoothness(model: StochasticModel) -> float:
    """Exact gradient-Lipschitz constant 2 * max_c ||Q_c||_2 of a quadratic model."""
    if model.quad_forms is None:
        return 0.0
    return 2.0 * max(
        float(np.max(np.abs(np.linalg.eigvalsh(q)))) for q in model.quad_forms
    )


# --- training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainOptions:
    epochs: int
    lr: float
    batch_size: int = 32
    noisy_copies: int = 0
    sigma_train: float = 0.0

    def __post_init__(self):
        if self.epochs < 0 or self.lr <= 0 or self.batch_size < 1:
            raise ValueError("invalid training options")
        if self.noisy_copies < 0 or self.sigma_train < 0:
            raise ValueError("invalid noisy-copy options")


@dataclass(frozen=True)
class TrainResult:
    model: StochasticModel
    epoch_losses: tuple[float, ...]


def init_params(arch: Architecture, seed: Seed) -> np.ndarray:
    """Scaled-Gaussian weight init, zero biases."""
    rng = seed_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:]):
        gain = math.sqrt(2.0 / n_in) if arch.activation == "relu" else math.sqrt(1.0 / n_in)
        weights.append(gain * rng.standard_normal((n_out, n_in)))
        biases.append(np.zeros(n_out))
    return arch.pack(weights, biases)


def _forward_cache(arch: Architecture, weights, biases, inputs, masks=None):
    """Batched single-realization forward pass.

    Returns post-mask activations per layer, the activation derivative
    factors used by backprop (mask and scale folded in), and the logits.
    ``masks`` holds one pre-scaled (B, width) inverted-dropout mask per
    hidden layer.
    """
    acts = [inputs]
    derivs = []
    a = inputs
    for layer in range(len(weights) - 1):
        z = a @ weights[layer].T + biases[layer]
        if arch.activation == "relu":
            a = np.maximum(z, 0.0)
            deriv = (z > 0.0).astype(np.float64)
        else:
            a = np.tanh(z)
            deriv = 1.0 - a * a
        if masks is not None:
            a = a * masks[layer]
            deriv = deriv * masks[layer]
        acts.append(a)
        derivs.append(deriv)
    logits = a @ weights[-1].T + biases[-1]
    return acts, derivs, logits


def batch_logits(arch: Architecture, theta, inputs) -> np.ndarray:
    """Logits of one realization over a batch of inputs (training/smoothing path)."""
    weights, biases = arch.unpack(np.asarray(theta, dtype=np.float64))
    _, _, logits = _forward_cache(
        arch, weights, biases, np.asarray(inputs, dtype=np.float64)
    )
    return logits


def batch_input_grads(arch: Architecture, theta, inputs, gout) -> np.ndarray:
    """Per-input gradient of <gout_b, logits_b> for one realization."""
    weights, biases = arch.unpack(np.asarray(theta, dtype=np.float64))
    inputs = np.asarray(inputs, dtype=np.float64)
    _, derivs, _ = _forward_cache(arch, weights, biases, inputs)
    g = np.asarray(gout, dtype=np.float64)
    for layer in range(len(weights) - 1, -1, -1):
        ga = g @ weights[layer]
        if layer == 0:
            return ga
        g = ga * derivs[layer - 1]
    raise AssertionError("unreachable")


def _stable_ce(logits: np.ndarray, labels: np.ndarray):
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    losses = lse - logits[np.arange(len(labels)), labels]
    probs = np.exp(logits - lse[:, None])
    return losses, probs


def train(
    arch: Architecture,
    inputs,
    labels,
    opts: TrainOptions,
    seed: Seed,
    noise: NoiseSpec | None = None,
    input_noise: float = 0.0,
) -> TrainResult:
    """Minibatch SGD with cross-entropy; optionally replaces each example by
    ``noisy_copies`` Gaussian-perturbed copies (input-smoothing training).

    When the target noise is dropout, fresh inverted-dropout masks are
    applied per batch so MC-dropout evaluation matches the training regime.
    """
    if arch.output != "softmax":
        raise ValueError("training requires a softmax output")
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if inputs.ndim != 2 or inputs.shape[0] != labels.shape[0]:
        raise ValueError("inputs and labels disagree")
    if labels.min() < 0 or labels.max() >= arch.n_classes:
        raise ValueError("labels out of range")
    theta = init_params(arch, split_seed(seed, "init"))
    weights, biases = arch.unpack(theta)  # views; updates happen in place
    rng = seed_rng(split_seed(seed, "shuffle"))
    drop_p = noise.dropout_p if noise is not None and noise.kind == "dropout" else 0.0
    n = inputs.shape[0]
    epoch_losses = []
    for epoch in range(opts.epochs):
        order = rng.permutation(n)
        total, count = 0.0, 0
        for start in range(0, n, opts.batch_size):
            idx = order[start : start + opts.batch_size]
            xb, yb = inputs[idx], labels[idx]
            if opts.noisy_copies > 0:
                xb = np.repeat(xb, opts.noisy_copies, axis=0)
                yb = np.repeat(yb, opts.noisy_copies)
                xb = xb + opts.sigma_train * rng.standard_normal(xb.shape)
            masks = None
            if drop_p > 0.0:
                masks = [
                    (rng.random((xb.shape[0], w)) >= drop_p) / (1.0 - drop_p)
                    for w in arch.layer_sizes[1:-1]
                ]
            acts, derivs, logits = _forward_cache(arch, weights, biases, xb, masks)
            losses, probs = _stable_ce(logits, yb)
            batch_loss = float(losses.mean())
            if not math.isfinite(batch_loss):
                raise ValueError(f"training diverged at epoch {epoch}")
            total += float(losses.sum())
            count += len(yb)
            g = probs
            g[np.arange(len(yb)), yb] -= 1.0
            g /= len(yb)
            for layer in range(len(weights) - 1, -1, -1):
                gw = g.T @ acts[layer]
                gb = g.sum(axis=0)
                if layer > 0:
                    g = (g @ weights[layer]) * derivs[layer - 1]
                weights[layer] -= opts.lr * gw
                biases[layer] -= opts.lr * gb
        epoch_losses.append(total / count)
    model = StochasticModel(
        arch=arch,
        base_params=theta,
        noise=noise if noise is not None else NoiseSpec.none(),
        input_noise=input_noise,
    )
    return TrainResult(model=model, epoch_losses=tuple(epoch_losses))


# --- checkpoints --------------------------------------------------------------


def save_model(model: StochasticModel, path) -> None:
    """Lossless structured-text checkpoint (floats round-trip via repr)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "arch": {
            "layer_sizes": list(model.arch.layer_sizes),
            "activation": model.arch.activation,
            "output": model.arch.output,
        },
        "base_params": model.base_params.tolist(),
        "noise": {
            "kind": model.noise.kind,
            "sigma_w": model.noise.sigma_w,
            "dropout_p": model.noise.dropout_p,
        },
        "input_noise": model.input_noise,
        "quad_forms": None
        if model.quad_forms is None
        else model.quad_forms.tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def load_model(path) -> StochasticModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a stochcert checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")
    arch = Architecture(
        tuple(payload["arch"]["layer_sizes"]),
        payload["arch"]["activation"],
        payload["arch"]["output"],
    )
    noise = NoiseSpec(
        payload["noise"]["kind"],
        sigma_w=payload["noise"]["sigma_w"],
        dropout_p=payload["noise"]["dropout_p"],
    )
    quad = payload.get("quad_forms")
    return StochasticModel(
        arch=arch,
        base_params=np.asarray(payload["base_params"], dtype=np.float64),
        noise=noise,
        input_noise=payload.get("input_noise", 0.0),
        quad_forms=None if quad is None else np.asarray(quad, dtype=np.float64),
    )
