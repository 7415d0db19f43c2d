"""Compiled and pure kernel backends must agree."""

import numpy as np
import pytest

from mvrs.kernels import _pure

try:
    from mvrs.kernels import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None, reason="compiled kernels not built")


@needs_compiled
class TestBackendAgreement:
    def test_fnv1a64_bitwise(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            data = rng.bytes(int(rng.integers(0, 300)))
            assert _core.fnv1a64(data) == _pure.fnv1a64(data)

    def test_splitmix64_bitwise(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            seed = int(rng.integers(0, 1 << 63))
            n = int(rng.integers(1, 100))
            assert (_core.splitmix64_fill(seed, n) == _pure.splitmix64_fill(seed, n)).all()

    def test_laplacian_variance_close(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            h, w = (int(x) for x in rng.integers(3, 40, size=2))
            img = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
            a = _core.laplacian_variance_u8(img)
            b = _pure.laplacian_variance_u8(img)
            assert a == pytest.approx(b, rel=1e-9, abs=1e-9)

    def test_select_diverse_same_ids(self):
        # Fresh queries (not members of the candidate set) keep the
        # keep/reject margins away from exact ties, where summation-order
        # ULPs could legitimately differ between backends.
        rng = np.random.default_rng(3)
        for _ in range(20):
            n, dim = 60, 8
            vecs = rng.normal(size=(n, dim)).astype(np.float32)
            vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
            vecs = np.ascontiguousarray(vecs)
            q = rng.normal(size=dim)
            q /= np.linalg.norm(q)
            sims = vecs.astype(np.float64) @ q
            ids = np.argsort(-sims).astype(np.int64)
            sims_sorted = sims[ids]
            a = _core.select_diverse(vecs, ids, sims_sorted, 8)
            b = _pure.select_diverse(vecs, ids, sims_sorted, 8)
            assert a.tolist() == b.tolist()

    def test_search_layer_exhaustive_agreement(self):
        # With ef covering the whole (connected) graph, both backends must
        # return every node ranked identically.
        rng = np.random.default_rng(4)
        n, dim = 150, 8
        vecs = rng.normal(size=(n, dim)).astype(np.float32)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        vecs = np.ascontiguousarray(vecs)
        adj = np.stack([(np.arange(n) + 1) % n, (np.arange(n) - 1) % n], axis=1).astype(np.int32)
        degs = np.full(n, 2, dtype=np.int32)
        for qi in range(10):
            q = np.ascontiguousarray(rng.normal(size=dim).astype(np.float32))
            entries = np.array([qi], dtype=np.int64)
            a_ids, a_sims = _core.hnsw_search_layer(
                vecs, adj, degs, entries, q, n, np.zeros(n, dtype=np.uint8)
            )
            b_ids, b_sims = _pure.hnsw_search_layer(
                vecs, adj, degs, entries, q, n, np.zeros(n, dtype=np.uint8)
            )
            assert a_ids.tolist() == b_ids.tolist()
            assert np.abs(a_sims - b_sims).max() < 1e-9

    def test_search_layer_beams_overlap_on_random_graph(self):
        # Partial beams chase ULP-sensitive frontiers; require strong (not
        # bitwise) agreement between the backends.
        rng = np.random.default_rng(5)
        n, dim, deg = 200, 8, 6
        vecs = rng.normal(size=(n, dim)).astype(np.float32)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        vecs = np.ascontiguousarray(vecs)
        adj = rng.integers(0, n, size=(n, deg)).astype(np.int32)
        degs = np.full(n, deg, dtype=np.int32)
        overlaps = []
        for _ in range(10):
            q = np.ascontiguousarray(rng.normal(size=dim).astype(np.float32))
            entries = np.array([0], dtype=np.int64)
            a_ids, _ = _core.hnsw_search_layer(
                vecs, adj, degs, entries, q, 16, np.zeros(n, dtype=np.uint8)
            )
            b_ids, _ = _pure.hnsw_search_layer(
                vecs, adj, degs, entries, q, 16, np.zeros(n, dtype=np.uint8)
            )
            overlaps.append(
                len(set(a_ids.tolist()) & set(b_ids.tolist())) / max(len(a_ids), 1)
            )
        assert min(overlaps) >= 0.75
        assert sum(overlaps) / len(overlaps) >= 0.9

    def test_search_layer_eligibility_mask(self):
        rng = np.random.default_rng(5)
        n, dim = 100, 4
        vecs = rng.normal(size=(n, dim)).astype(np.float32)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        vecs = np.ascontiguousarray(vecs)
        # ring graph: fully connected traversal
        adj = np.stack([(np.arange(n) + 1) % n, (np.arange(n) - 1) % n], axis=1).astype(np.int32)
        degs = np.full(n, 2, dtype=np.int32)
        eligible = (np.arange(n) % 3 == 0).astype(np.uint8)
        q = np.ascontiguousarray(vecs[7])
        for impl in (_core, _pure):
            ids, _ = impl.hnsw_search_layer(
                vecs, adj, degs, np.array([0], dtype=np.int64), q, n,
                np.zeros(n, dtype=np.uint8), eligible,
            )
            assert all(i % 3 == 0 for i in ids.tolist())
            assert len(ids) == int(eligible.sum())


class TestPureKernels:
    def test_splitmix_stream_nonzero_and_distinct(self):
        out = _pure.splitmix64_fill(7, 64)
        assert len(set(out.tolist())) == 64

    def test_search_layer_exhaustive_equals_bruteforce(self):
        rng = np.random.default_rng(6)
        n, dim = 50, 4
        vecs = rng.normal(size=(n, dim)).astype(np.float32)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        vecs = np.ascontiguousarray(vecs)
        adj = np.stack([(np.arange(n) + 1) % n, (np.arange(n) - 1) % n], axis=1).astype(np.int32)
        degs = np.full(n, 2, dtype=np.int32)
        q = np.ascontiguousarray(vecs[3])
        ids, sims = _pure.hnsw_search_layer(
            vecs, adj, degs, np.array([0], dtype=np.int64), q, n, np.zeros(n, dtype=np.uint8)
        )
        oracle = np.argsort(-(vecs.astype(np.float64) @ q.astype(np.float64)))
        assert ids.tolist() == oracle.tolist()
