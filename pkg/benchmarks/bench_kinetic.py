"""Benchmark the fused temporal-template kernel: compiled vs numpy.

The kernel runs once per layer per denoising step, so at sampling time it
dominates the runtime of the large presets. Usage:

    python benchmarks/bench_kinetic.py
"""

import time

import numpy as np

from motionkit import _kinetic_np

try:
    from motionkit import _kinetic_c
except ImportError:
    _kinetic_c = None

# (frames, templates, latent dim, taylor order) per preset-like shape
SHAPES = [
    ("desk", 32, 4, 8, 2),
    ("tiny/small", 196, 16, 64, 2),
    ("base", 196, 16, 128, 2),
    ("large", 196, 32, 128, 2),
]

HEADS = 10
SIGMA = 1.0


def run(kernel, times, centers, coeffs, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = kernel(times, centers, coeffs, SIGMA)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    rng = np.random.default_rng(0)
    print(f"{'shape':>12} {'F':>5} {'N':>4} {'D':>5} | {'numpy':>10} "
          f"{'compiled':>10} {'speedup':>8}")
    for name, frames, n_templates, dim, order in SHAPES:
        times = np.sort(rng.uniform(0, 8, size=frames))
        centers = rng.uniform(0, 8, size=(HEADS, n_templates))
        coeffs = rng.standard_normal((HEADS, n_templates, order + 1, dim))
        t_np, ref = run(_kinetic_np.temporal_mu, times, centers, coeffs, repeats=5)
        if _kinetic_c is None:
            print(f"{name:>12} {frames:>5} {n_templates:>4} {dim:>5} | "
                  f"{t_np * 1e3:>8.2f}ms {'n/a':>10} {'-':>8}")
            continue
        t_c, got = run(_kinetic_c.temporal_mu, times, centers, coeffs, repeats=5)
        err = np.max(np.abs(got - ref))
        assert err < 1e-12, f"backends disagree: {err}"
        print(f"{name:>12} {frames:>5} {n_templates:>4} {dim:>5} | "
              f"{t_np * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {t_np / t_c:>7.1f}x")
    if _kinetic_c is None:
        print("compiled kernel not built; install with Cython + a C compiler")


if __name__ == "__main__":
    main()
