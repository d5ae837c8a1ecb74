"""Wall-clock comparison of the numba and numpy time-stepping backends.

    python3 benchmarks/bench_kernels.py [--segments 50 100 200 400] [--repeat 3]

Each case simulates an RLC line with a resistive load for the default
10^4 steps.  The numba kernel is compiled (or loaded from cache) before
timing starts.
"""

import argparse
import time

import numpy as np

from icm import _kernels
from icm.ladder import LadderConfig, build_ladder, simulate
from icm.params import LinePerUnit, Resistive, Termination

LINE = LinePerUnit(1e6, 1e-6, 2e-10)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--segments", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    warm = LadderConfig(LINE, 1e-3, Termination(100.0, Resistive(1e3)), n_segments=2)
    simulate(warm, backend="numba")

    print(f"{'N':>5} {'states':>7} {'numba_s':>9} {'numpy_s':>9} {'speedup':>8} {'max_diff_V':>11}")
    for n in args.segments:
        cfg = LadderConfig(LINE, 2e-3, Termination(100.0, Resistive(2e3)), n_segments=n)
        states = build_ladder(cfg).n_states
        t_nb, a = best_of(lambda: simulate(cfg, backend="numba"), args.repeat)
        t_np, b = best_of(lambda: simulate(cfg, backend="numpy"), args.repeat)
        diff = float(np.max(np.abs(a.v_load - b.v_load)))
        print(f"{n:>5} {states:>7} {t_nb:>9.4f} {t_np:>9.4f} {t_np / t_nb:>8.1f} {diff:>11.2e}")
    print(f"default backend: {_kernels.BACKEND} (set ICM_NUMBA=0 for numpy)")


if __name__ == "__main__":
    main()
