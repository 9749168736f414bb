"""Gradient attacks computed on an attack-side realization set.

All attacks ascend the loss of the set-mean prediction (or descend toward a
target class), honor a p-norm budget, optionally clip the adversarial point
into a box input domain, and flag vanishing gradients instead of emitting a
spurious direction. Realized perturbations are recomputed after clipping so
the reported norm is the one that actually reaches the classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import SampleSet, StochasticModel, mc_loss_gradient, sample_params
from .numerics import LOSS_KINDS, Seed, split_seed

ATTACK_METHODS = ("fgm_l2", "fgsm_linf", "pgd")

ZERO_GRAD_NORM = 1e-30
# absolute slack before the ball projection rescales; keeps feasible vectors
# (including eta * unit-vector up to roundoff) bit-identical
PROJECTION_SLACK = 1e-13


@dataclass(frozen=True)
class AttackSpec:
    method: str
    eta: float
    loss: str = "cross_entropy"
    s_attack: int = 1
    pgd_steps: int = 0
    pgd_nu: float = 0.0
    box: tuple[float, float] | None = None
    target: int | None = None
    resample_per_step: bool = True

    def __post_init__(self):
        if self.method not in ATTACK_METHODS:
            raise ValueError(f"unknown attack method {self.method!r}")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.s_attack < 1:
            raise ValueError("s_attack must be >= 1")
        if self.method == "pgd" and (self.pgd_steps < 1 or self.pgd_nu <= 0):
            raise ValueError("pgd needs pgd_steps >= 1 and pgd_nu > 0")


@dataclass(frozen=True)
class AttackResult:
    delta: np.ndarray
    requested_norm: float
    realized_norm: float
    zero_gradient: bool
    per_step_norms: tuple[float, ...] = field(default_factory=tuple)
    attack_seed: Seed | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.delta, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "delta", arr)


def _clip_delta(x: np.ndarray, delta: np.ndarray, box) -> np.ndarray:
    """Clip x + delta into the box and return the perturbation that remains."""
    if box is None:
        return delta
    lo, hi = box
    return np.clip(x + delta, lo, hi) - x


def project_l2_ball(delta: np.ndarray, radius: float) -> np.ndarray:
    """Scale delta onto the L2 ball; feasible inputs pass through unchanged."""
    nrm = float(np.linalg.norm(delta))
    if nrm <= radius + PROJECTION_SLACK:
        return delta
    return delta * (radius / nrm)


def _norm(delta: np.ndarray, p: str) -> float:
    if p == "l2":
        return float(np.linalg.norm(delta))
    if p == "linf":
        return float(np.max(np.abs(delta))) if delta.size else 0.0
    raise ValueError(f"unknown norm {p!r}")


def fgm_l2(
    model: StochasticModel, x, y: int, spec: AttackSpec, attack_set: SampleSet
) -> AttackResult:
    """Single-step L2-normalized gradient attack on the attack-set prediction."""
    if spec.method != "fgm_l2":
        raise ValueError("spec.method must be fgm_l2")
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = mc_loss_gradient(model, x, attack_set, spec.loss, y, spec.target)
    nrm = float(np.linalg.norm(g))
    if nrm < ZERO_GRAD_NORM:
        return AttackResult(
            delta=np.zeros_like(x),
            requested_norm=spec.eta,
            realized_norm=0.0,
            zero_gradient=True,
            attack_seed=attack_set.seed,
        )
    delta = _clip_delta(x, spec.eta * (g / nrm), spec.box)
    return AttackResult(
        delta=delta,
        requested_norm=spec.eta,
        realized_norm=_norm(delta, "l2"),
        zero_gradient=False,
        attack_seed=attack_set.seed,
    )


def fgsm_linf(
    model: StochasticModel, x, y: int, spec: AttackSpec, attack_set: SampleSet
) -> AttackResult:
    """Single-step sign attack under the L-infinity budget (sign(0) = 0)."""
    if spec.method != "fgsm_linf":
        raise ValueError("spec.method must be fgsm_linf")
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = mc_loss_gradient(model, x, attack_set, spec.loss, y, spec.target)
    if float(np.linalg.norm(g)) < ZERO_GRAD_NORM:
        return AttackResult(
            delta=np.zeros_like(x),
            requested_norm=spec.eta,
            realized_norm=0.0,
            zero_gradient=True,
            attack_seed=attack_set.seed,
        )
    delta = _clip_delta(x, spec.eta * np.sign(g), spec.box)
    return AttackResult(
        delta=delta,
        requested_norm=spec.eta,
        realized_norm=_norm(delta, "linf"),
        zero_gradient=False,
        attack_seed=attack_set.seed,
    )


def pgd(
    model: StochasticModel, x, y: int, spec: AttackSpec, seed: Seed
) -> AttackResult:
    """Iterated L2 steps with ball projection and box clipping.

    With resample_per_step a fresh attack set is drawn every iteration;
    otherwise one set (derived from the seed) is reused, which makes a
    single step with pgd_nu = eta coincide exactly with fgm_l2 on that set.
    """
    if spec.method != "pgd":
        raise ValueError("spec.method must be pgd")
    x = np.ascontiguousarray(x, dtype=np.float64)
    fixed_set = None
    if not spec.resample_per_step:
        fixed_set = sample_params(
            model, split_seed(seed, "attack", 0), spec.s_attack, role="attack"
        )
    delta = np.zeros_like(x)
    per_step = []
    any_step = False
    for step in range(spec.pgd_steps):
        sset = fixed_set
        if sset is None:
            sset = sample_params(
                model, split_seed(seed, "pgd_step", step), spec.s_attack, role="attack"
            )
        g = mc_loss_gradient(model, x + delta, sset, spec.loss, y, spec.target)
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient at pgd step {step}")
        nrm = float(np.linalg.norm(g))
        if nrm >= ZERO_GRAD_NORM:
            any_step = True
            delta = delta + spec.pgd_nu * (g / nrm)
            delta = project_l2_ball(delta, spec.eta)
            delta = _clip_delta(x, delta, spec.box)
        per_step.append(float(np.linalg.norm(delta)))
    return AttackResult(
        delta=delta,
        requested_norm=spec.eta,
        realized_norm=_norm(delta, "l2"),
        zero_gradient=not any_step,
        per_step_norms=tuple(per_step),
        attack_seed=seed,
    )


def run_attack(
    model: StochasticModel,
    x,
    y: int,
    spec: AttackSpec,
    seed: Seed,
    attack_set: SampleSet | None = None,
) -> AttackResult:
    """Dispatch on spec.method; single-step methods draw their set from the
    seed unless one is supplied."""
    if spec.method == "pgd":
        return pgd(model, x, y, spec, seed)
    if attack_set is None:
        attack_set = sample_params(
            model, split_seed(seed, "attack", 0), spec.s_attack, role="attack"
        )
    if spec.method == "fgm_l2":
        return fgm_l2(model, x, y, spec, attack_set)
    return fgsm_linf(model, x, y, spec, attack_set)


def effective_length(result: AttackResult, p: str = "l2") -> float:
    """Realized perturbation norm after clipping and zero-gradient effects."""
    return _norm(np.asarray(result.delta), p)
