"""Time the compiled and numpy backends on the two stepping kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from genmarkov import _core_py
from genmarkov.kernel import ExpDecay, eval_time, sample_process
from genmarkov.lindblad import thermal_generator
from genmarkov.operators import pure_state, vectorize

try:
    from genmarkov import _core
except ImportError:
    _core = None


def volterra_case(nsteps):
    l0, l1 = thermal_generator(1.0, 0.5, 2.0)
    dt = 10.0 / nsteps
    kvals = eval_time(ExpDecay(1.0, 5.0), dt * np.arange(nsteps + 1))
    return (l0, l1, kvals, vectorize(pure_state([1, 1])), dt, nsteps)


def stochastic_case(n_traj, nsteps):
    l0, _ = thermal_generator(1.0, 0.5, 0.0)
    h = np.diag([-1.0, 1.0]).astype(complex)
    hc = np.kron(np.eye(2), h) - np.kron(h.T, np.eye(2))
    paths = np.array([sample_process(ExpDecay(0.3, 1.0), 0.01, nsteps + 1, (0, i)).samples for i in range(n_traj)])
    return (l0, hc, paths, vectorize(pure_state([1, 1])), 0.01)


def bench(label, fn, args, repeat):
    best = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
    print(f"{label:<34s} {best * 1e3:10.2f} ms")
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    cases = [
        ("volterra_heun n=2000", "volterra_heun", volterra_case(2000)),
        ("volterra_heun n=10000", "volterra_heun", volterra_case(10000)),
        ("stochastic_heun 1000x500", "stochastic_heun", stochastic_case(1000, 500)),
    ]
    for label, name, case in cases:
        py = bench(f"{label} [python]", getattr(_core_py, name), case, args.repeat)
        if _core is None:
            print("compiled backend not built")
            continue
        c = bench(f"{label} [compiled]", getattr(_core, name), case, args.repeat)
        print(f"{'':<34s} speedup x{py / c:.1f}")


if __name__ == "__main__":
    main()
