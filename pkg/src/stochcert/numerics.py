"""Substrate numerics: MLP architectures with a flat parameter layout,
forward/backward passes, losses, a finite-difference oracle, and
deterministic seed derivation.

The network family is fixed: dense layers, relu or tanh hidden activation,
softmax or raw-logit output. Parameters live in one flat float64 vector per
realization, laid out layer-major with each layer's weights (row-major)
before its biases, so that noise injection is a single vector operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .kernels import ACT_RELU, ACT_TANH, mlp_forward, mlp_vjp_input

ACTIVATIONS = ("relu", "tanh")
OUTPUTS = ("softmax", "logits")
LOSS_KINDS = ("cross_entropy", "neg_margin", "cw_logits")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Architecture:
    """Shape of one dense network: layer widths, activation, output map.

    ``layer_sizes[0]`` is the input dimension, the last entry the number of
    classes. A two-entry tuple is a pure linear model.
    """

    layer_sizes: tuple[int, ...]
    activation: str = "relu"
    output: str = "softmax"

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(int(s) < 1 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be positive: {self.layer_sizes}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.output not in OUTPUTS:
            raise ValueError(f"unknown output {self.output!r}")
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @cached_property
    def n_params(self) -> int:
        return sum(
            o * i + o for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:])
        )

    @cached_property
    def sizes_arr(self) -> np.ndarray:
        arr = np.asarray(self.layer_sizes, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @property
    def act_id(self) -> int:
        return ACT_RELU if self.activation == "relu" else ACT_TANH

    def pack(self, weights, biases) -> np.ndarray:
        """Flatten per-layer (W, b) into one parameter vector."""
        if len(weights) != len(biases) or len(weights) != len(self.layer_sizes) - 1:
            raise ValueError("wrong number of layers")
        parts = []
        for layer, (w, b) in enumerate(zip(weights, biases)):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            shape = (self.layer_sizes[layer + 1], self.layer_sizes[layer])
            if w.shape != shape or b.shape != (shape[0],):
                raise ValueError(f"layer {layer}: expected W{shape}, b({shape[0]},)")
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def unpack(self, flat: np.ndarray):
        """Inverse of pack; returns per-layer (W, b) views into ``flat``."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {flat.shape}")
        weights, biases = [], []
        off = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            weights.append(flat[off : off + n_out * n_in].reshape(n_out, n_in))
            off += n_out * n_in
            biases.append(flat[off : off + n_out])
            off += n_out
        return weights, biases


@dataclass(frozen=True)
class Seed:
    """64-bit seed; derive children with split_seed for independent streams."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _mix64(z: int) -> int:
    """splitmix64 finalizer: a strong 64-bit bijection."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def split_seed(parent: Seed, label: str, index: int = 0) -> Seed:
    """Deterministic child seed for (parent, label, index).

    Distinct indices under one (parent, label) can never collide (the final
    mix is a bijection); distinct labels collide only with hash probability.
    """
    h = _mix64(parent.value)
    for byte in label.encode("utf-8"):
        h = _mix64(h ^ byte)
    return Seed(_mix64(h ^ (index & _MASK64)))


def seed_rng(seed: Seed) -> np.random.Generator:
    """Fresh numpy generator for one derived seed."""
    return np.random.default_rng(seed.value)


# --- scalar heads -----------------------------------------------------------


@dataclass(frozen=True)
class OutputHead:
    """Scalar head selecting one discriminant score f_c."""

    index: int


@dataclass(frozen=True)
class MarginHead:
    """Scalar head f_label - f_other on the model outputs."""

    label: int
    other: int

    def __post_init__(self):
        if self.label == self.other:
            raise ValueError("margin head needs two distinct classes")


@dataclass(frozen=True)
class LossHead:
    """Scalar head loss(outputs, label) for one of the supported losses."""

    kind: str
    label: int

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}")


ScalarHead = Union[OutputHead, MarginHead, LossHead]


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")


def _as_input(arch: Architecture, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (arch.in_dim,):
        raise ValueError(f"expected input of shape ({arch.in_dim},), got {x.shape}")
    _check_finite("input", x)
    return x


def _as_params(arch: Architecture, theta) -> np.ndarray:
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if theta.shape != (arch.n_params,):
        raise ValueError(
            f"expected {arch.n_params} parameters, got shape {theta.shape}"
        )
    _check_finite("parameters", theta)
    return theta


def raw_scores(arch: Architecture, theta, x) -> np.ndarray:
    """Pre-output scores (logits) of a single realization."""
    theta = _as_params(arch, theta)
    x = _as_input(arch, x)
    z = mlp_forward(arch.sizes_arr, arch.act_id, theta[None, :], x[None, :])[0]
    _check_finite("network output", z)
    return z


def forward(arch: Architecture, theta, x) -> np.ndarray:
    """Discriminant scores f(x, theta): softmax probabilities or raw logits."""
    z = raw_scores(arch, theta, x)
    return softmax(z) if arch.output == "softmax" else z


def _softmax_vjp(p: np.ndarray, g: np.ndarray) -> np.ndarray:
    """d<g, softmax(z)>/dz given p = softmax(z)."""
    return p * (g - np.dot(g, p))


def _runner_up(scores: np.ndarray, label: int) -> int:
    """argmax over classes other than label (smallest index on ties)."""
    masked = scores.copy()
    masked[label] = -np.inf
    return int(np.argmax(masked))


def head_value(arch: Architecture, head: ScalarHead, logits: np.ndarray) -> float:
    """Evaluate a scalar head on one realization's logits."""
    outputs = softmax(logits) if arch.output == "softmax" else logits
    if isinstance(head, OutputHead):
        return float(outputs[head.index])
    if isinstance(head, MarginHead):
        return float(outputs[head.label] - outputs[head.other])
    if head.kind == "cross_entropy":
        return loss_eval(outputs, head.label, "cross_entropy")
    if head.kind == "neg_margin":
        return loss_eval(outputs, head.label, "neg_margin")
    # cw_logits always reads the pre-softmax scores
    return loss_eval(logits, head.label, "cw_logits")


def _cw_logit_grad(logits: np.ndarray, label: int, k: int) -> np.ndarray:
    """Gradient of the hinged logit-margin loss (zero below the hinge)."""
    c = _runner_up(logits, label)
    if logits[c] - logits[label] <= 0.0:
        return np.zeros(k)
    e = np.eye(k)
    return e[c] - e[label]


def head_logit_grad(
    arch: Architecture, head: ScalarHead, logits: np.ndarray
) -> np.ndarray:
    """Gradient of the scalar head with respect to the logits."""
    k = arch.n_classes
    e = np.eye(k)
    if arch.output == "logits":
        if isinstance(head, OutputHead):
            return e[head.index].copy()
        if isinstance(head, MarginHead):
            return e[head.label] - e[head.other]
        if head.kind == "cross_entropy":
            raise ValueError("cross-entropy needs softmax outputs")
        if head.kind == "neg_margin":
            c = _runner_up(logits, head.label)
            return e[c] - e[head.label]
        return _cw_logit_grad(logits, head.label, k)
    p = softmax(logits)
    if isinstance(head, OutputHead):
        return _softmax_vjp(p, e[head.index])
    if isinstance(head, MarginHead):
        return _softmax_vjp(p, e[head.label] - e[head.other])
    if head.kind == "cross_entropy":
        # fused form p - e_y: stays exact when the softmax saturates
        return p - e[head.label]
    if head.kind == "neg_margin":
        c = _runner_up(p, head.label)
        return _softmax_vjp(p, e[c] - e[head.label])
    return _cw_logit_grad(logits, head.label, k)  # cw reads logits directly


def grad_input(arch: Architecture, theta, x, head: ScalarHead) -> np.ndarray:
    """Exact reverse-mode gradient of the selected scalar with respect to x."""
    theta = _as_params(arch, theta)
    x = _as_input(arch, x)
    z = mlp_forward(arch.sizes_arr, arch.act_id, theta[None, :], x[None, :])[0]
    _check_finite("network output", z)
    gout = head_logit_grad(arch, head, z)
    g = mlp_vjp_input(
        arch.sizes_arr, arch.act_id, theta[None, :], x[None, :], gout[None, :]
    )[0]
    _check_finite("gradient", g)
    return g


def loss_eval(scores, y: int, kind: str) -> float:
    """Evaluate a loss on a score vector (probabilities or logits).

    neg_margin is -(f_y - max_{c != y} f_c); cw_logits is
    max(max_{i != y} Z_i - Z_y, 0) on the supplied logits.
    """
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.shape[0]
    if not 0 <= y < k:
        raise ValueError(f"class {y} out of range for {k} classes")
    if kind == "cross_entropy":
        if np.any(scores < -1e-12) or abs(float(np.sum(scores)) - 1.0) > 1e-9:
            raise ValueError("cross-entropy expects a probability vector")
        p = float(scores[y])
        return math.inf if p <= 0.0 else -math.log(p)
    if kind == "neg_margin":
        return -float(scores[y] - scores[_runner_up(scores, y)])
    if kind == "cw_logits":
        return max(float(scores[_runner_up(scores, y)] - scores[y]), 0.0)
    raise ValueError(f"unknown loss {kind!r}")


def central_diff(fn, x, step: float) -> np.ndarray:
    """Central finite differences of a scalar function, coordinate by coordinate."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        hi = x.copy()
        lo = x.copy()
        hi[i] += step
        lo[i] -= step
        g[i] = (fn(hi) - fn(lo)) / (2.0 * step)
    return g


def finite_diff(arch: Architecture, theta, x, head: ScalarHead, step: float) -> np.ndarray:
    """Finite-difference estimate of grad_input; the independent gradient oracle."""
    theta = _as_params(arch, theta)

    def fn(pt):
        return head_value(arch, head, raw_scores(arch, theta, pt))

    return central_diff(fn, _as_input(arch, x), step)
