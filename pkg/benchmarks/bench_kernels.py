"""Time the compiled and numpy RK4 backends on propagator builds.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the median wall time per chip size for every available backend and
the largest difference between the propagators they produce.
"""

import argparse
import time

import numpy as np

from arlat import kernels
from arlat.model import build_chain, build_qubit
from arlat.profiles import Cosine
from arlat.propagator import propagator_matrix

CASES = {
    "chain n=6": lambda: build_chain(6, 1.0, 1.0, np.sqrt(7.0))[0],
    "modulated n=6": lambda: build_chain(6, 1.0, Cosine(1.0, 1.0, 2.0), np.sqrt(7.0))[0],
    "qubit 2x5": lambda: build_qubit(5, 1.0, 1.0, 2.0, 3.0, 1.0, 1.0, 1.0)[0],
    "chain n=20": lambda: build_chain(20, 1.0, 1.0, 1.5)[0],
}


def timed(chip, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        u = propagator_matrix(chip)
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), u.matrix


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':<16}" + "".join(f"{b + ' [ms]':>16}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    start = kernels.BACKEND
    try:
        for name, make in CASES.items():
            chip = make()
            res = {}
            for b in backends:
                kernels.use_backend(b)
                timed(chip, 1)  # warm-up
                res[b] = timed(chip, args.repeat)
            row = f"{name:<16}" + "".join(f"{res[b][0] * 1e3:>16.2f}" for b in backends)
            if len(backends) == 2:
                speed = res["python"][0] / res["cython"][0]
                diff = np.max(np.abs(res["python"][1] - res["cython"][1]))
                row += f"{speed:>10.1f}{diff:>12.1e}"
            print(row)
    finally:
        kernels.use_backend(start)


if __name__ == "__main__":
    main()
