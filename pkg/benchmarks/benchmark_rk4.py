"""Benchmark the RK4 stepping kernel: numba backend vs pure numpy.

Runs the standard three-spin fast-forward scenario (vbar=10, T=1) at several
step counts and reports wall time per run for both backends, plus the
maximum deviation between their final states.

Usage:  python benchmarks/benchmark_rk4.py [--repeats 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from ffspin._kernels import build_kernel, numba_available
from ffspin.fastforward import FastForwardProfile
from ffspin.model import ModelSpec, THREE_SPIN_KAGOME, driving_generators, h0_parts
from ffspin.regularization import coefficient_table
from ffspin.spectrum import default_r_grid, track_branch


def prepare_kernel_args(steps: int):
    spec = ModelSpec(kind=THREE_SPIN_KAGOME)
    profile = FastForwardProfile(v_bar=10.0, t_ff=1.0)
    branch = track_branch(spec, default_r_grid(spec, profile.r_end(spec.r0)))
    table = coefficient_table(spec, branch)
    h_base, h_slope = h0_parts(spec)
    breaks, coeffs = table.spline_data()
    psi0 = np.ascontiguousarray(branch.vectors[0], dtype=np.complex128)
    return (np.ascontiguousarray(h_base), np.ascontiguousarray(h_slope),
            np.ascontiguousarray(driving_generators(spec)),
            np.ascontiguousarray(breaks), np.ascontiguousarray(coeffs),
            0.0, 10.0, 1.0, psi0, steps, steps, True)


def time_kernel(kernel, args, repeats: int) -> tuple[float, np.ndarray]:
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kernel(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out[0][-1]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per configuration (best is kept)")
    args = parser.parse_args()

    numpy_kernel = build_kernel(False)
    numba_kernel = build_kernel(True) if numba_available() else None
    if numba_kernel is None:
        print("numba not available: timing the numpy backend only")

    print(f"{'steps':>8} {'numpy [ms]':>12} {'numba [ms]':>12} "
          f"{'speedup':>8} {'max |dpsi|':>12}")
    for steps in (1_000, 10_000, 100_000):
        kernel_args = prepare_kernel_args(steps)
        if numba_kernel is not None:
            numba_kernel(*kernel_args)  # compile before timing
        t_np, psi_np = time_kernel(numpy_kernel, kernel_args, args.repeats)
        if numba_kernel is not None:
            t_nb, psi_nb = time_kernel(numba_kernel, kernel_args, args.repeats)
            dev = float(np.max(np.abs(psi_np - psi_nb)))
            print(f"{steps:>8} {1e3 * t_np:>12.2f} {1e3 * t_nb:>12.2f} "
                  f"{t_np / t_nb:>8.1f} {dev:>12.2e}")
        else:
            print(f"{steps:>8} {1e3 * t_np:>12.2f} {'-':>12} {'-':>8} {'-':>12}")


if __name__ == "__main__":
    main()
