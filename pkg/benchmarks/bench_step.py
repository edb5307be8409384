"""Compare the numba kernel against the pure-numpy fallback.

Times the raw state-update kernel and the full env.step loop for each
available backend, at a small and a large grid point.

    python3 benchmarks/bench_step.py [--steps 200000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from container_sim import _kernels
from container_sim.config import default_config
from container_sim.env import ContainerEnv


def bench_kernel(backend: str, n: int, m: int, iters: int) -> float:
    impl = _kernels.step_impl(backend)
    rng = np.random.default_rng(0)
    volumes = rng.uniform(0, 35, n)
    timers = np.zeros(m)
    eps = rng.normal(0, 0.1, n)
    alpha = np.full(n, 0.3)
    actuation = np.full(n, 120.0)
    per_product = np.full(n, 40.0)
    product_size = np.full(n, 5.0)
    impl(volumes, timers, eps, alpha, 60.0, 0, actuation, per_product, product_size)  # warmup
    start = time.perf_counter()
    for _ in range(iters):
        impl(volumes, timers, eps, alpha, 60.0, 0, actuation, per_product, product_size)
    return iters / (time.perf_counter() - start)


def bench_env(backend: str, n: int, m: int, delta: float, steps: int) -> float:
    cfg = default_config(n, m, delta)
    env = ContainerEnv(cfg, backend=backend)
    env.reset(0)
    env.step(0)  # warmup
    done_steps = 0
    seed = 0
    start = time.perf_counter()
    while done_steps < steps:
        env.reset(seed)
        for _ in range(min(1400, steps - done_steps)):
            res = env.step(0)
            done_steps += 1
            if res.terminated or res.truncated:
                break
        seed += 1
    return done_steps / (time.perf_counter() - start)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=200_000,
                        help="kernel iterations (env.step runs steps // 4)")
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)} "
          f"(CONTAINER_SIM_BACKEND selects the default; active: {_kernels.active_backend()})")
    print(f"{'benchmark':<28}" + "".join(f"{b:>16}" for b in backends))
    for n, m, delta in ((5, 2, 60.0), (11, 11, 60.0)):
        rates = [bench_kernel(b, n, m, args.steps) for b in backends]
        print(f"{f'kernel n={n} m={m}':<28}"
              + "".join(f"{r / 1e6:>13.2f} M/s" for r in rates))
        rates = [bench_env(b, n, m, delta, args.steps // 4) for b in backends]
        print(f"{f'env.step n={n} m={m}':<28}"
              + "".join(f"{r / 1e3:>13.1f} k/s" for r in rates))


if __name__ == "__main__":
    main()
