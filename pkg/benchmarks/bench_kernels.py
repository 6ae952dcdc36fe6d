"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--draws 20000]

Times null F-hat draws and truncated-normal generation on both backends,
checks that the outputs agree bit for bit, and prints the speedup.
"""
import argparse
import time

import numpy as np

from dpanova import _core_py

try:
    from dpanova import _core
except ImportError:
    _core = None


def timed(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=20_000)
    args = parser.parse_args()
    if _core is None:
        raise SystemExit("compiled core not built; run `pip install -e . --no-build-isolation`")

    m = args.draws
    cases = {
        "null draws n=10000 k=10 eps=1": lambda mod: mod.null_f_draws(
            1, 10_000, 10, 0.0225, 18.001, 14.0, 0, m),
        "null draws n=99 k=3 eps=inf": lambda mod: mod.null_f_draws(
            1, 99, 3, 0.0225, 0.0, 0.0, 0, m),
        "truncated normals": lambda mod: mod.Stream(1).truncated_normal_array(0.5, 0.15, m),
    }
    print(f"{'kernel':34s} {'python ns/op':>13s} {'compiled ns/op':>15s} {'speedup':>8s}")
    for name, fn in cases.items():
        t_py, a = timed(lambda: fn(_core_py), repeat=1)
        t_c, b = timed(lambda: fn(_core))
        assert np.array_equal(a, b), f"backends disagree on {name}"
        print(f"{name:34s} {t_py / m * 1e9:13.0f} {t_c / m * 1e9:15.0f} {t_py / t_c:7.0f}x")


if __name__ == "__main__":
    main()
