"""Compare the compiled and pure-Python adaptive Simpson kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case integrates the eigenframe integrand of a random d-dimensional model
over [0, t]; both backends must return identical leaf counts.
"""

import argparse
import timeit

import numpy as np

from qfi_workbench import kernels
from qfi_workbench.generator import hamiltonian_and_derivative
from qfi_workbench.model import random_model
from qfi_workbench.operators import eigendecompose

CASES = [(2, 1.0), (4, 5.0), (6, 10.0), (8, 20.0)]


def integrand(d, seed=0):
    spec = random_model(np.random.default_rng(seed), d, 3)
    H, dH = hamiltonian_and_derivative(spec, 0.3)
    dec = eigendecompose(H)
    E = dec.eigenvalues
    return dec.to_eigenbasis(dH).reshape(-1), (E[:, None] - E[None, :]).reshape(-1)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--tol", type=float, default=1e-9)
    args = parser.parse_args()
    if "cython" not in kernels.BACKENDS:
        raise SystemExit("compiled backend not built; run `pip install -e . --no-build-isolation`")
    print(f"{'d':>3} {'t':>6} {'leaves':>8} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for d, t in CASES:
        amps, freqs = integrand(d)
        timings = {}
        leaves = {}
        for name, fn in kernels.BACKENDS.items():
            call = lambda: fn(amps, freqs, 0.0, t, args.tol, 2**20)
            leaves[name] = call()[2]
            timings[name] = min(timeit.repeat(call, number=1, repeat=args.repeat)) * 1e3
        assert leaves["python"] == leaves["cython"]
        speedup = timings["python"] / timings["cython"]
        print(f"{d:>3} {t:>6.1f} {leaves['cython']:>8} {timings['python']:>12.2f} {timings['cython']:>12.3f} {speedup:>7.0f}x")


if __name__ == "__main__":
    main()
