"""Time the compiled hot kernels against the numpy fallback.

Run as `python3 benchmarks/bench_kernels.py`.  Sizes default to what the
resolvent-quadrature calculus actually uses (200 x 200 quadrature, dim-81
tridiagonal operator); pass --big for a heavier sweep.
"""

import argparse
import time

import numpy as np

from semiweyl._kernels import backends


def _time(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _aae_case(nodes, freqs, rng):
    x = rng.uniform(-9.0, 13.0, nodes)
    y = rng.uniform(1e-6, 2.0, nodes)
    xi = np.linspace(-40.0, 40.0, freqs)
    fhat = (rng.normal(size=freqs) + 1j * rng.normal(size=freqs))
    fhat *= np.exp(-np.abs(xi))  # smooth-window-like spectral decay
    return x, y, xi, fhat


def _tridiag_case(dim, nq, rng):
    diag = rng.normal(size=dim)
    sub = rng.normal(size=dim - 1) + 1j * rng.normal(size=dim - 1)
    zs = rng.uniform(-2.0, 8.0, nq) + 1j * rng.uniform(0.1, 2.0, nq)
    coefs = rng.normal(size=nq) + 1j * rng.normal(size=nq)
    return diag, sub, zs, coefs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--big", action="store_true", help="heavier sweep")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    impls = backends()
    if "compiled" not in impls:
        print("compiled core not built; timing numpy fallback only")

    rng = np.random.default_rng(0)
    aae_sizes = [(5_000, 2048), (40_000, 4096)]
    tri_sizes = [(81, 400), (161, 400)]
    if args.big:
        aae_sizes.append((160_000, 8192))
        tri_sizes.append((321, 1600))

    print("%-20s %-16s %10s %10s %8s %9s" %
          ("kernel", "size", "numpy", "compiled", "speedup", "max diff"))
    for nodes, freqs in aae_sizes:
        case = _aae_case(nodes, freqs, rng)
        row = {}
        for name, impl in impls.items():
            row[name], out = _time(
                lambda: impl.aae_integrals(*case, 1, 8, 8.0),
                repeats=args.repeats)
            row[name + "_out"] = out
        _print_row("aae_integrals", "%dx%d" % (nodes, freqs), row)
    for dim, nq in tri_sizes:
        case = _tridiag_case(dim, nq, rng)
        row = {}
        for name, impl in impls.items():
            row[name], out = _time(
                lambda: impl.tridiag_accumulate(*case), repeats=args.repeats)
            row[name + "_out"] = out
        _print_row("tridiag_accumulate", "dim %d, %d rhs" % (dim, nq), row)


def _print_row(kernel, size, row):
    if "compiled" in row:
        g, d = row["numpy_out"], row["compiled_out"]
        if isinstance(g, tuple):
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(g, d))
        else:
            diff = float(np.max(np.abs(g - d)))
        print("%-20s %-16s %9.4fs %9.4fs %7.1fx %9.1e" %
              (kernel, size, row["numpy"], row["compiled"],
               row["numpy"] / row["compiled"], diff))
    else:
        print("%-20s %-16s %9.4fs %10s %8s %9s" %
              (kernel, size, row["numpy"], "-", "-", "-"))


if __name__ == "__main__":
    main()
