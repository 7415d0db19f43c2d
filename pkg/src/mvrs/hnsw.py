"""Navigable small-world graph over unit vectors (cosine similarity).

Construction and traversal follow the standard multi-layer scheme:
every node lives on layer 0, a geometrically thinning subset on upper
layers, greedy descent from the top entry point, then a best-first
beam on layer 0.  Node levels are derived from a hash of the node id,
so rebuilding a graph over the same vectors is fully deterministic.

The layer traversal itself runs in the selected kernel backend.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels

_LEVEL_SALT = 0x5851F42D4C957F2D


def _node_level(node_id: int, mult: float) -> int:
    raw = int(kernels.splitmix64_fill((node_id + 1) ^ _LEVEL_SALT, 1)[0])
    u = (raw + 0.5) / 2.0**64
    return int(-math.log(u) * mult)


class HnswGraph:
    def __init__(self, dim: int, m: int = 16, ef_construction: int = 200):
        if m < 2:
            raise ValueError(f"graph degree must be >= 2, got {m}")
        if ef_construction < 1:
            raise ValueError(f"ef_construction must be >= 1, got {ef_construction}")
        self.dim = dim
        self.m = m
        # Dense base layer: random high-dimensional unit vectors need more
        # layer-0 links than the conventional 2*m to route well at small ef.
        self.m0 = 4 * m
        self.ef_construction = ef_construction
        self.mult = 1.0 / math.log(m)
        self.size = 0
        self.entry_point = -1
        self.max_level = -1
        # Per layer: (capacity, row-width) int32 adjacency padded with -1.
        self._adj: list[np.ndarray] = []
        self._deg: list[np.ndarray] = []

    def _max_degree(self, layer: int) -> int:
        return self.m0 if layer == 0 else self.m

    def _row_width(self, layer: int) -> int:
        # Rows carry slack beyond the degree bound so pruning can run
        # amortized (only when a row overflows) instead of per backlink.
        bound = self._max_degree(layer)
        return bound + bound // 2

    def _ensure_layer(self, layer: int, capacity: int) -> None:
        while len(self._adj) <= layer:
            width = self._row_width(len(self._adj))
            self._adj.append(np.full((capacity, width), -1, dtype=np.int32))
            self._deg.append(np.zeros(capacity, dtype=np.int32))
        # Every layer array is indexed by global node id, so all of them
        # must cover the new node even when it only reaches layer 0.
        for lc in range(len(self._adj)):
            if self._adj[lc].shape[0] < capacity:
                grown = max(capacity, 2 * self._adj[lc].shape[0])
                adj = np.full((grown, self._adj[lc].shape[1]), -1, dtype=np.int32)
                adj[: self._adj[lc].shape[0]] = self._adj[lc]
                deg = np.zeros(grown, dtype=np.int32)
                deg[: self._deg[lc].shape[0]] = self._deg[lc]
                self._adj[lc] = adj
                self._deg[lc] = deg

    def _search_layer(self, vectors, query, entries, layer, ef, eligible=None):
        visited = np.zeros(self.size, dtype=np.uint8)
        return kernels.hnsw_search_layer(
            vectors[: self.size],
            self._adj[layer][: self.size],
            self._deg[layer][: self.size],
            np.asarray(entries, dtype=np.int64),
            query,
            ef,
            visited,
            eligible,
        )

    def _select_neighbors(self, vectors, cand_ids, cand_sims, bound) -> list[int]:
        """Diversity-aware selection: keep a candidate only if it is closer
        to the query than to anything already selected; backfill with the
        nearest rejected candidates when short."""
        ids = kernels.select_diverse(
            vectors[: self.size],
            np.ascontiguousarray(cand_ids, dtype=np.int64),
            np.ascontiguousarray(cand_sims, dtype=np.float64),
            bound,
        )
        return [int(i) for i in ids]

    def _link(self, vectors, layer: int, node: int, neighbors: list[int]) -> None:
        adj, deg = self._adj[layer], self._deg[layer]
        bound = self._max_degree(layer)
        width = self._row_width(layer)
        n = len(neighbors[:bound])
        adj[node, :n] = neighbors[:bound]
        deg[node] = n
        for nb in neighbors[:bound]:
            if deg[nb] < width:
                adj[nb, deg[nb]] = node
                deg[nb] += 1
            else:
                # Row overflow: re-select the neighbour's links (including
                # us) down to the degree bound, leaving slack for appends.
                ids = np.concatenate([adj[nb, : deg[nb]], [node]]).astype(np.int64)
                sims = (vectors[ids] @ vectors[nb]).astype(np.float64)
                order = np.lexsort((ids, -sims))
                keep = self._select_neighbors(vectors, ids[order], sims[order], bound)
                adj[nb, : len(keep)] = keep
                adj[nb, len(keep) :] = -1
                deg[nb] = len(keep)

    def add(self, vectors: np.ndarray, node_id: int) -> None:
        """Insert one node; ``vectors`` must expose rows [0, node_id]."""
        if node_id != self.size:
            raise ValueError(f"nodes must be added densely; expected {self.size}, got {node_id}")
        level = _node_level(node_id, self.mult)
        self._ensure_layer(level, max(node_id + 1, 8))
        self.size += 1

        if self.entry_point < 0:
            self.entry_point = node_id
            self.max_level = level
            return

        query = np.ascontiguousarray(vectors[node_id])
        entries = [self.entry_point]
        for layer in range(self.max_level, level, -1):
            ids, _ = self._search_layer(vectors, query, entries, layer, 1)
            if len(ids):
                entries = [int(ids[0])]

        for layer in range(min(level, self.max_level), -1, -1):
            ids, sims = self._search_layer(
                vectors, query, entries, layer, self.ef_construction
            )
            neighbors = self._select_neighbors(vectors, ids, sims, self._max_degree(layer))
            self._link(vectors, layer, node_id, neighbors)
            # Carry the full beam (not just the selected links) downward.
            entries = [int(i) for i in ids] if len(ids) else entries

        if level > self.max_level:
            self.entry_point = node_id
            self.max_level = level

    def extend(self, vectors: np.ndarray, upto: int) -> None:
        """Add nodes [size, upto) in order."""
        for node_id in range(self.size, upto):
            self.add(vectors, node_id)

    def search(self, vectors, query, ef: int, eligible=None) -> np.ndarray:
        """Ids of up to ``ef`` approximate nearest nodes, best first."""
        if self.size == 0:
            return np.empty(0, dtype=np.int64)
        query = np.ascontiguousarray(query, dtype=np.float32)
        entries = [self.entry_point]
        for layer in range(self.max_level, 0, -1):
            ids, _ = self._search_layer(vectors, query, entries, layer, 1)
            if len(ids):
                entries = [int(ids[0])]
        ids, _ = self._search_layer(vectors, query, entries, 0, ef, eligible)
        return ids
