#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Times the two hot operations (batched forward, batched input-VJP) across
realization counts and network sizes, plus one end-to-end certificate
pipeline, and prints a table with speedups. Run from the repo root:

    python benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from stochcert import (
    Architecture,
    AttackSpec,
    Seed,
    fgm_l2,
    linear_certificate,
    make_linear_gaussian,
    mc_predict,
    sample_params,
    split_seed,
)
from stochcert.kernels import available_backends


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeats):
    backends = available_backends()
    rng = np.random.default_rng(0)
    cases = [
        ((2, 32, 32, 2), 10),
        ((2, 32, 32, 2), 100),
        ((2, 64, 64, 64, 3), 100),
        ((8, 128, 128, 10), 100),
    ]
    rows = []
    for sizes, n_samples in cases:
        arch = Architecture(sizes, output="logits")
        params = np.ascontiguousarray(rng.standard_normal((n_samples, arch.n_params)))
        xs = rng.standard_normal((1, arch.in_dim))
        gout = np.ascontiguousarray(rng.standard_normal((n_samples, arch.n_classes)))
        for op in ("forward", "vjp"):
            timings = {}
            for name, mod in backends.items():
                if op == "forward":
                    fn = lambda m=mod: m.mlp_forward(arch.sizes_arr, 0, params, xs)
                else:
                    fn = lambda m=mod: m.mlp_vjp_input(
                        arch.sizes_arr, 0, params, xs, gout
                    )
                timings[name] = time_call(fn, repeats)
            rows.append((f"{'x'.join(map(str, sizes))} S={n_samples} {op}", timings))
    return rows


def bench_pipeline(repeats):
    """One attack + certificate round trip on a linear-Gaussian model."""
    rng = np.random.default_rng(1)
    model = make_linear_gaussian(4, 16, rng.standard_normal((4, 16)), 0.2)
    x = rng.standard_normal(16)
    seed = Seed(42)
    spec = AttackSpec(method="fgm_l2", eta=0.5, loss="neg_margin", s_attack=100)

    def run():
        aset = sample_params(model, split_seed(seed, "a"), 100, role="attack")
        iset = sample_params(model, split_seed(seed, "i"), 100, role="inference")
        y = mc_predict(model, x, iset).predicted_class
        res = fgm_l2(model, x, y, spec, aset)
        linear_certificate(model, x, y, iset, res.delta)

    return time_call(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    rows = bench_kernels(args.repeats)
    width = max(len(label) for label, _ in rows)
    header = f"{'case'.ljust(width)}  " + "".join(f"{n:>12}" for n in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, timings in rows:
        line = label.ljust(width) + "  "
        line += "".join(f"{timings[n] * 1e6:>10.1f}us" for n in backends)
        if len(timings) == 2:
            line += f"{timings['numpy'] / timings['cython']:>9.1f}x"
        print(line)
    pipeline = bench_pipeline(max(args.repeats // 4, 10))
    print(f"\nattack+certificate pipeline (active backend): {pipeline * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
