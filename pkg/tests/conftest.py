"""Shared helpers: independent straight-line network reimplementation and
random model generators used as oracles across the suite."""

import numpy as np
import pytest

from stochcert import Architecture, Seed


def straight_line_forward(arch: Architecture, theta, x):
    """Duplicate forward implementation with explicit loops.

    Re-derives the flat layout from its documented contract (layer-major,
    row-major weights before biases) without using Architecture.unpack, so
    it independently checks both the layout and the kernel forward pass.
    """
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    sizes = arch.layer_sizes
    off = 0
    a = x.copy()
    pre_activations = []
    for layer in range(len(sizes) - 1):
        n_in, n_out = sizes[layer], sizes[layer + 1]
        z = np.zeros(n_out)
        for j in range(n_out):
            acc = 0.0
            for i in range(n_in):
                acc += theta[off + j * n_in + i] * a[i]
            z[j] = acc
        off += n_out * n_in
        for j in range(n_out):
            z[j] += theta[off + j]
        off += n_out
        pre_activations.append(z.copy())
        if layer < len(sizes) - 2:
            if arch.activation == "relu":
                a = np.maximum(z, 0.0)
            else:
                a = np.tanh(z)
        else:
            a = z
    if arch.output == "softmax":
        e = np.exp(a - a.max())
        a = e / e.sum()
    return a, pre_activations


def random_arch(rng, output="softmax", activation=None):
    depth = rng.integers(0, 3)
    sizes = [int(rng.integers(2, 6))]
    sizes += [int(rng.integers(3, 12)) for _ in range(depth)]
    sizes.append(int(rng.integers(2, 5)))
    if activation is None:
        activation = "relu" if rng.random() < 0.5 else "tanh"
    return Architecture(tuple(sizes), activation=activation, output=output)


def random_params(rng, arch, scale=1.0):
    return scale * rng.standard_normal(arch.n_params)


def input_away_from_kinks(rng, arch, theta, margin=1e-4, tries=200):
    """Draw x whose relu pre-activations all stay clear of zero, so central
    differences do not straddle a kink."""
    for _ in range(tries):
        x = rng.standard_normal(arch.in_dim)
        if arch.activation != "relu":
            return x
        _, pre = straight_line_forward(arch, theta, x)
        if all(np.min(np.abs(z)) > margin for z in pre[:-1]) or len(pre) == 1:
            return x
    pytest.skip("could not find kink-free input")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def seed():
    return Seed(981_234_567)
