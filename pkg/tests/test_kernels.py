"""Backend contract tests: the compiled core and the numpy fallback must
agree to floating-point roundoff on identical inputs."""

import os
import subprocess
import sys

import numpy as np
import pytest

from stochcert.kernels import available_backends, backend

from conftest import random_arch, random_params

BACKENDS = available_backends()


def _kernel_inputs(rng, per_sample_x=False):
    arch = random_arch(rng, output="logits")
    n_samples = int(rng.integers(1, 12))
    params = np.stack([random_params(rng, arch) for _ in range(n_samples)])
    rows = n_samples if per_sample_x else 1
    xs = rng.standard_normal((rows, arch.in_dim))
    gout = rng.standard_normal((n_samples, arch.n_classes))
    return arch, params, xs, gout


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
class TestBackendParity:
    @pytest.mark.parametrize("per_sample_x", [False, True])
    def test_forward_agrees(self, rng, per_sample_x):
        for _ in range(30):
            arch, params, xs, _ = _kernel_inputs(rng, per_sample_x)
            outs = {
                name: mod.mlp_forward(arch.sizes_arr, arch.act_id, params, xs)
                for name, mod in BACKENDS.items()
            }
            np.testing.assert_allclose(
                outs["numpy"], outs["cython"], rtol=1e-12, atol=1e-13
            )

    @pytest.mark.parametrize("per_sample_x", [False, True])
    def test_vjp_agrees(self, rng, per_sample_x):
        for _ in range(30):
            arch, params, xs, gout = _kernel_inputs(rng, per_sample_x)
            grads = {
                name: mod.mlp_vjp_input(arch.sizes_arr, arch.act_id, params, xs, gout)
                for name, mod in BACKENDS.items()
            }
            np.testing.assert_allclose(
                grads["numpy"], grads["cython"], rtol=1e-12, atol=1e-13
            )


class TestSelection:
    def test_backend_is_known(self):
        assert backend in BACKENDS

    @pytest.mark.parametrize("choice", sorted(BACKENDS))
    def test_env_var_forces_backend(self, choice):
        env = dict(os.environ, STOCHCERT_KERNELS=choice)
        out = subprocess.run(
            [sys.executable, "-c", "from stochcert.kernels import backend; print(backend)"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == choice

    def test_invalid_choice_rejected(self):
        env = dict(os.environ, STOCHCERT_KERNELS="fortran")
        out = subprocess.run(
            [sys.executable, "-c", "import stochcert.kernels"],
            capture_output=True, text=True, env=env,
        )
        assert out.returncode != 0
