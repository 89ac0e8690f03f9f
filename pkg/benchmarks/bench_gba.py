"""Benchmark the iteration kernels: compiled extension vs pure python.

Runs the multi-start ascent on two built-in channels with both backends
and reports per-run wall time and the speedup.

Usage: python3 benchmarks/bench_gba.py [--starts N] [--repeats R]
"""

import argparse
import time

import numpy as np

from gamecap import ChannelParams, build_game_channel, make_chsh, make_parity
from gamecap._kernels import gba_py

try:
    from gamecap._kernels import gba_cy
except ImportError:
    gba_cy = None


def bench(kernel, W, sizes, starts, repeats):
    rng = np.random.default_rng(0)
    inits = [
        np.concatenate([rng.dirichlet(np.ones(s)) for s in sizes]) for _ in range(starts)
    ]
    best = np.inf
    value = np.nan
    for _ in range(repeats):
        t0 = time.perf_counter()
        finals = [kernel.gba_run(W, sizes, q0.copy(), 1e-9, 20000)[1][-1] for q0 in inits]
        best = min(best, (time.perf_counter() - t0) / starts)
        value = max(finals)
    return best, value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--starts", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    problems = [
        ("chsh eta=0", build_game_channel(make_chsh(), ChannelParams.from_noise(0.0))),
        ("4-parity eta=0", build_game_channel(make_parity(4), ChannelParams.from_noise(0.0))),
    ]
    print(f"{'channel':<16} {'backend':<8} {'ms/run':>10} {'value':>10}")
    for name, ch in problems:
        W, sizes = ch.flat_matrix(), ch.input_sizes
        t_py, v_py = bench(gba_py, W, sizes, args.starts, args.repeats)
        print(f"{name:<16} {'python':<8} {t_py * 1e3:>10.2f} {v_py:>10.6f}")
        if gba_cy is None:
            print(f"{name:<16} {'cython':<8} {'not built':>10}")
            continue
        t_cy, v_cy = bench(gba_cy, W, sizes, args.starts, args.repeats)
        print(f"{name:<16} {'cython':<8} {t_cy * 1e3:>10.2f} {v_cy:>10.6f}")
        print(f"{'':<16} speedup {t_py / t_cy:>9.1f}x  (values agree to {abs(v_py - v_cy):.2e})")


if __name__ == "__main__":
    main()
