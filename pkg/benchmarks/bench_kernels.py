"""Compare the compiled and pure-Python integration backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times a scaled PEO-PANI staircase run and a 21-point sine sweep with each
available backend, and checks that both produce the same currents.
"""
import argparse
import math
import time

import numpy as np

from memfreq import RelaxationModel, build_staircase, run
from memfreq._backend import BACKENDS
from memfreq.analysis import frequency_sweep
from memfreq.waveform import PRESETS

TAU = 0.1


def staircase(backend):
    spec = PRESETS["peo-pani"].scaled((TAU / 5) / 20.0)
    return run(RelaxationModel(), build_staircase(spec), backend=backend).i


def sweep(backend):
    omegas = np.logspace(-2, 2, 21) / (2 * math.pi * TAU)
    rep = frequency_sweep(RelaxationModel(), 1.0, omegas, backend=backend)
    return np.array([p.H for p in rep.points])


def best_of(fn, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(backend)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"backends: {', '.join(sorted(BACKENDS))}")
    for label, fn in (("staircase", staircase), ("sweep", sweep)):
        results = {b: best_of(fn, b, args.repeat) for b in sorted(BACKENDS)}
        line = "  ".join(f"{b}={t * 1e3:9.2f} ms" for b, (t, _) in results.items())
        if len(results) == 2:
            (tc, oc), (tp, op) = results["cython"], results["python"]
            diff = float(np.max(np.abs(oc - op) / np.maximum(np.abs(op), 1e-300)))
            line += f"  speedup={tp / tc:6.1f}x  max rel diff={diff:.1e}"
        print(f"{label:10s} {line}")


if __name__ == "__main__":
    main()
