"""Synthetic 2-D/low-d classification datasets for desk-scale experiments.

All generators are deterministic given the spec seed, emit balanced classes
(within one point), and affinely normalize coordinates into the unit box so
attack budgets and clipping are comparable across dataset kinds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Seed, seed_rng

DATASET_KINDS = ("blobs", "two_moons", "rings")


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n: int
    noise: float = 0.05
    n_classes: int = 2
    dim: int = 2
    seed: int = 0
    centers: tuple | None = None  # blobs only; one center per class

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("need at least 2 points")
        if self.kind != "blobs" and (self.n_classes != 2 or self.dim != 2):
            raise ValueError(f"{self.kind} is a 2-class, 2-D dataset")
        if self.n_classes < 2 or self.dim < 1 or self.noise < 0:
            raise ValueError("invalid dataset spec")


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray  # (n, d), inside [0, 1]^d
    labels: np.ndarray  # (n,)
    spec: DatasetSpec

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def _class_counts(n: int, k: int) -> list[int]:
    counts = [n // k] * k
    for c in range(n % k):
        counts[c] += 1
    return counts


def _normalize_unit_box(points: np.ndarray) -> np.ndarray:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = hi - lo
    out = np.empty_like(points)
    for j in range(points.shape[1]):
        if span[j] <= 0:
            out[:, j] = 0.5
        else:
            out[:, j] = (points[:, j] - lo[j]) / span[j]
    return out


def gen_dataset(spec: DatasetSpec) -> Dataset:
    rng = seed_rng(Seed(spec.seed))
    counts = _class_counts(spec.n, spec.n_classes if spec.kind == "blobs" else 2)
    if spec.kind == "blobs":
        if spec.centers is not None:
            centers = np.asarray(spec.centers, dtype=np.float64)
            if centers.shape != (spec.n_classes, spec.dim):
                raise ValueError("need one center per class")
        else:
            angles = 2.0 * np.pi * np.arange(spec.n_classes) / spec.n_classes
            centers = np.zeros((spec.n_classes, spec.dim))
            centers[:, 0] = np.cos(angles)
            centers[:, 1 % spec.dim] = np.sin(angles)
        parts, labels = [], []
        for c, cnt in enumerate(counts):
            parts.append(centers[c] + spec.noise * rng.standard_normal((cnt, spec.dim)))
            labels.append(np.full(cnt, c, dtype=np.int64))
        points = np.concatenate(parts)
        y = np.concatenate(labels)
    elif spec.kind == "two_moons":
        t0 = np.pi * rng.random(counts[0])
        t1 = np.pi * rng.random(counts[1])
        top = np.column_stack([np.cos(t0), np.sin(t0)])
        bottom = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
        points = np.concatenate([top, bottom])
        points += spec.noise * rng.standard_normal(points.shape)
        y = np.concatenate(
            [np.zeros(counts[0], dtype=np.int64), np.ones(counts[1], dtype=np.int64)]
        )
    else:  # rings
        radii = (1.0, 2.0)
        parts, labels = [], []
        for c, cnt in enumerate(counts):
            t = 2.0 * np.pi * rng.random(cnt)
            ring = radii[c] * np.column_stack([np.cos(t), np.sin(t)])
            parts.append(ring + spec.noise * rng.standard_normal((cnt, 2)))
            labels.append(np.full(cnt, c, dtype=np.int64))
        points = np.concatenate(parts)
        y = np.concatenate(labels)
    points = _normalize_unit_box(points)
    points.setflags(write=False)
    y.setflags(write=False)
    return Dataset(inputs=points, labels=y, spec=spec)
