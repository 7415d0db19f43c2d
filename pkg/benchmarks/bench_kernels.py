#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure NumPy/Python
fallback on the hot paths, plus the BLAS flat scan both backends share.

Usage: python benchmarks/bench_kernels.py [--n 10000] [--dim 64]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mvrs.kernels import _pure

try:
    from mvrs.kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_row(name, pure_s, core_s):
    if core_s is None:
        print(f"{name:<28} pure {pure_s * 1e3:9.3f} ms   compiled      n/a")
    else:
        speedup = pure_s / core_s if core_s > 0 else float("inf")
        print(
            f"{name:<28} pure {pure_s * 1e3:9.3f} ms   compiled {core_s * 1e3:9.3f} ms"
            f"   ({speedup:5.1f}x)"
        )


def build_graph(backend, vectors, m=16, ef_construction=200):
    import mvrs.hnsw as hnsw_mod

    original = hnsw_mod.kernels
    class _Shim:
        splitmix64_fill = staticmethod(_pure.splitmix64_fill)
        hnsw_search_layer = staticmethod(backend.hnsw_search_layer)
        select_diverse = staticmethod(backend.select_diverse)
    hnsw_mod.kernels = _Shim
    try:
        graph = hnsw_mod.HnswGraph(vectors.shape[1], m=m, ef_construction=ef_construction)
        graph.extend(vectors, vectors.shape[0])
        return graph
    finally:
        hnsw_mod.kernels = original


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=10_000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--graph-n", type=int, default=2_000,
                        help="corpus size for the graph build comparison")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"backends: pure python/numpy vs {'compiled cython' if _core else 'NOT BUILT'}")
    print()

    # byte hashing (1 MiB)
    blob = rng.bytes(1 << 20)
    pure_s = timeit(lambda: _pure.fnv1a64(blob), repeat=3)
    core_s = timeit(lambda: _core.fnv1a64(blob), repeat=3) if _core else None
    bench_row("fnv1a64 (1 MiB)", pure_s, core_s)

    # generator fill (one 512-d embedding seed stream x 1000)
    def pure_fill():
        for seed in range(1000):
            _pure.splitmix64_fill(seed, 512)

    def core_fill():
        for seed in range(1000):
            _core.splitmix64_fill(seed, 512)

    bench_row(
        "splitmix64_fill (1000x512)",
        timeit(pure_fill, repeat=3),
        timeit(core_fill, repeat=3) if _core else None,
    )

    # sharpness stencil on a 480x640 frame
    frame = rng.integers(0, 256, size=(480, 640), dtype=np.uint8)
    bench_row(
        "laplacian_variance (480x640)",
        timeit(lambda: _pure.laplacian_variance_u8(frame)),
        timeit(lambda: _core.laplacian_variance_u8(frame)) if _core else None,
    )

    # graph traversal on a prebuilt graph
    vecs = rng.normal(size=(args.n, args.dim)).astype(np.float32)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = np.ascontiguousarray(vecs)
    graph = build_graph(_core if _core else _pure, vecs)
    adj0 = graph._adj[0][: graph.size]
    deg0 = graph._deg[0][: graph.size]
    queries = rng.normal(size=(50, args.dim)).astype(np.float32)
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)

    def traverse(backend):
        for q in queries:
            visited = np.zeros(graph.size, dtype=np.uint8)
            backend.hnsw_search_layer(
                vecs, adj0, deg0, np.array([graph.entry_point], dtype=np.int64),
                np.ascontiguousarray(q), 64, visited,
            )

    bench_row(
        f"graph layer search x50 (n={args.n})",
        timeit(lambda: traverse(_pure), repeat=3),
        timeit(lambda: traverse(_core), repeat=3) if _core else None,
    )

    # end-to-end graph build
    small = vecs[: args.graph_n]
    bench_row(
        f"graph build (n={args.graph_n})",
        timeit(lambda: build_graph(_pure, small), repeat=1),
        timeit(lambda: build_graph(_core, small), repeat=1) if _core else None,
    )

    # shared BLAS flat scan (identical in both backends by design)
    big = rng.normal(size=(100_000, 512)).astype(np.float32)
    q = rng.normal(size=512).astype(np.float32)
    big @ q
    scan = timeit(lambda: big @ q, repeat=5)
    print()
    print(f"flat scan 100k x 512 (numpy/BLAS, both backends): {scan * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
