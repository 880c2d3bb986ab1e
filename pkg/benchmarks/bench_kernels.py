"""Throughput comparison of the two kernel backends.

Runs the interior update and the entropy residual on square grids with
both the jitted and the pure-numpy implementation, reports Mcell/s, and
asserts the outputs agree bit for bit.

    python3 benchmarks/bench_kernels.py [n1 [n2 ...]]
"""

import sys
import time

import numpy as np

from burgers2d.kernels import get_backend


def _time_call(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n: int) -> None:
    rng = np.random.default_rng(0)
    ext = rng.uniform(-1.0, 1.0, size=(n + 2, n + 2))
    h = 2.0 / n
    dt = 0.4 * h  # safely inside the CFL bound for |u| <= 1
    k = 0.5

    rows = []
    outs = {}
    for name in ("numpy", "numba"):
        try:
            mod = get_backend(name)
        except ImportError:
            print(f"{name}: unavailable, skipped")
            continue
        mod.step_interior(ext, dt, h, h)  # warm-up (jit compile on first call)
        mod.entropy_interior(ext, mod.step_interior(ext, dt, h, h), dt, h, h, k)
        t_step = _time_call(mod.step_interior, ext, dt, h, h)
        after = mod.step_interior(ext, dt, h, h)
        t_ent = _time_call(mod.entropy_interior, ext, after, dt, h, h, k)
        outs[name] = (after, mod.entropy_interior(ext, after, dt, h, h, k))
        rows.append((name, n * n / t_step / 1e6, n * n / t_ent / 1e6))

    print(f"grid {n}x{n}")
    for name, step_rate, ent_rate in rows:
        print(f"  {name:>6}: step {step_rate:8.1f} Mcell/s   entropy {ent_rate:8.1f} Mcell/s")
    if len(outs) == 2:
        same_step = np.array_equal(outs["numpy"][0], outs["numba"][0])
        same_ent = np.array_equal(outs["numpy"][1], outs["numba"][1])
        print(f"  bit-identical: step {same_step}, entropy {same_ent}")
        if not (same_step and same_ent):
            sys.exit("backend outputs differ")


def main() -> None:
    sizes = [int(a) for a in sys.argv[1:]] or [256, 512, 1024]
    for n in sizes:
        bench(n)


if __name__ == "__main__":
    main()
