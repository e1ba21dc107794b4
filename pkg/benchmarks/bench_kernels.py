#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

The projected-SOR sweep is the one genuinely hot loop in the package
(sequential Gauss-Seidel, not expressible as array operations); the
ordered reductions back every reported integral. Both implementations
perform identical arithmetic, so this also asserts bit-identical results.

Usage: python benchmarks/bench_kernels.py [--radius R] [--sweeps N]
"""

import argparse
import time

import numpy as np

from graphrothe import LatticeZ2, VertexField, exhaust_generative, field_on_interior
from graphrothe import _kernels_py
from graphrothe.operators import DirichletOperator

try:
    from graphrothe import _kernels
except ImportError:
    _kernels = None


def build_obstacle_system(radius):
    exh = exhaust_generative(LatticeZ2(), [(0, 0)], radius)
    dom = exh.level(radius)
    op = DirichletOperator(dom)
    ell = 0.25
    import scipy.sparse as sp
    S = (op.stiffness + sp.diags(op.mass / ell)).tocsr()
    S.sort_indices()
    rng = np.random.default_rng(42)
    g = exh.graph
    f = VertexField(g, rng.normal(size=g.num_vertices))
    u_prev = field_on_interior(dom, rng.normal(size=op.n))
    b = op.mass * (op.restrict(f) + op.restrict(u_prev) / ell)
    lower = np.zeros(op.n)
    return (np.ascontiguousarray(S.indptr, dtype=np.int64),
            np.ascontiguousarray(S.indices, dtype=np.int64),
            np.ascontiguousarray(S.data),
            np.ascontiguousarray(S.diagonal()),
            np.ascontiguousarray(b), lower, op.n)


def time_psor(impl, system, sweeps):
    indptr, indices, data, diag, b, lower, n = system
    u = np.zeros(n)
    t0 = time.perf_counter()
    for _ in range(sweeps):
        impl.psor_sweep(indptr, indices, data, diag, b, lower, u, 1.0)
    return time.perf_counter() - t0, u


def time_seq_sum(impl, values, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        s = impl.seq_sum(values)
    return time.perf_counter() - t0, s


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--radius", type=int, default=24,
                        help="lattice ball radius (default 24, ~1200 rows)")
    parser.add_argument("--sweeps", type=int, default=300)
    parser.add_argument("--sum-size", type=int, default=200_000)
    parser.add_argument("--sum-repeats", type=int, default=50)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; timing the fallback only")

    system = build_obstacle_system(args.radius)
    n = system[-1]
    print(f"projected SOR: {n} unknowns, {args.sweeps} sweeps")
    t_py, u_py = time_psor(_kernels_py, system, args.sweeps)
    print(f"  pure python : {t_py:8.3f} s")
    if _kernels is not None:
        t_cy, u_cy = time_psor(_kernels, system, args.sweeps)
        print(f"  compiled    : {t_cy:8.3f} s   (speedup {t_py / t_cy:.1f}x)")
        assert np.array_equal(u_py, u_cy), "kernel implementations diverged"

    rng = np.random.default_rng(0)
    values = np.ascontiguousarray(rng.normal(size=args.sum_size))
    print(f"ordered sum: {args.sum_size} terms, {args.sum_repeats} repeats")
    t_py, s_py = time_seq_sum(_kernels_py, values, args.sum_repeats)
    print(f"  pure python : {t_py:8.3f} s")
    if _kernels is not None:
        t_cy, s_cy = time_seq_sum(_kernels, values, args.sum_repeats)
        print(f"  compiled    : {t_cy:8.3f} s   (speedup {t_py / t_cy:.1f}x)")
        assert s_py == s_cy, "kernel implementations diverged"


if __name__ == "__main__":
    main()
