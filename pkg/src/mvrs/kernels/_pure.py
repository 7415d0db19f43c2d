"""Pure NumPy/Python kernel fallbacks.

Mirrors the surface of the compiled extension in ``_core.pyx``.  The
integer kernels (fnv1a64, splitmix64_fill) are bitwise-identical to the
compiled versions; the float kernels agree up to summation order.
"""

from __future__ import annotations

import heapq

import numpy as np

_U64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV_OFFSET_BASIS
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _U64
    return h


def splitmix64_fill(seed: int, n: int) -> np.ndarray:
    """First n outputs of the splitmix64 generator, as uint64."""
    out = np.empty(n, dtype=np.uint64)
    state = seed & _U64
    for i in range(n):
        state = (state + _SPLITMIX_GAMMA) & _U64
        z = state
        z = ((z ^ (z >> 30)) * _MIX_1) & _U64
        z = ((z ^ (z >> 27)) * _MIX_2) & _U64
        z = z ^ (z >> 31)
        out[i] = z
    return out


def laplacian_variance_u8(img: np.ndarray) -> float:
    """Population variance of the 4-neighbour Laplacian on interior pixels.

    Valid convolution only: the response is evaluated where the full
    3x3 stencil fits, so borders contribute nothing.
    """
    f = img.astype(np.float64)
    resp = (
        f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:]
        - 4.0 * f[1:-1, 1:-1]
    )
    mean = resp.mean()
    return float(((resp - mean) ** 2).mean())


def select_diverse(vectors, cand_ids, cand_sims, bound, alpha=1.0):
    """Diversity-aware neighbour selection.

    Scans candidates in descending-similarity order and keeps one only if
    no already-kept candidate is (alpha-relaxed) closer to it than the
    query is; the nearest rejected candidates backfill up to ``bound``.
    With alpha=1 this is the classic occlusion rule; alpha>1 keeps more
    mid-range links at the same degree bound.
    """
    m = len(cand_ids)
    if m <= bound:
        return np.asarray(cand_ids, dtype=np.int64).copy()
    cand_sims = np.asarray(cand_sims, dtype=np.float64)
    cand_vecs = vectors[np.asarray(cand_ids, dtype=np.int64)].astype(np.float64)
    reject_at = 1.0 - (1.0 - cand_sims) / (alpha * alpha)
    max_sim_to_sel = np.full(m, -np.inf)
    keep = np.zeros(m, dtype=bool)
    selected: list[int] = []
    for i in range(m):
        if len(selected) == bound:
            break
        if max_sim_to_sel[i] < reject_at[i]:
            keep[i] = True
            selected.append(int(cand_ids[i]))
            if len(selected) == bound:
                break
            np.maximum(max_sim_to_sel, cand_vecs @ cand_vecs[i], out=max_sim_to_sel)
    for i in range(m):
        if len(selected) == bound:
            break
        if not keep[i]:
            selected.append(int(cand_ids[i]))
    return np.asarray(selected, dtype=np.int64)


def hnsw_search_layer(vectors, adj, deg, entry_ids, query, ef, visited, eligible=None):
    """Best-first traversal of one graph layer.

    Args:
        vectors: float32 (n, dim) row matrix.
        adj: int32 (n, max_degree) adjacency, rows padded with -1.
        deg: int32 (n,) live degree per node.
        entry_ids: int64 array of entry points (need not be deduplicated).
        query: float32 (dim,) query vector.
        ef: size of the result set to maintain.
        visited: uint8 (n,) scratch, zeroed by the caller.
        eligible: optional uint8 (n,) mask; ineligible nodes are traversed
            but never admitted to the result set.

    Returns:
        (ids, sims): int64 / float64 arrays sorted by descending similarity
        (ties by ascending id).
    """
    q = query.astype(np.float64)
    candidates: list[tuple[float, int]] = []  # min-heap keyed on -sim
    results: list[tuple[float, int]] = []  # min-heap keyed on sim (worst on top)

    for node in np.asarray(entry_ids, dtype=np.int64):
        node = int(node)
        if visited[node]:
            continue
        visited[node] = 1
        sim = float(vectors[node].astype(np.float64) @ q)
        heapq.heappush(candidates, (-sim, node))
        if eligible is None or eligible[node]:
            heapq.heappush(results, (sim, node))
            if len(results) > ef:
                heapq.heappop(results)

    while candidates:
        neg_sim, node = heapq.heappop(candidates)
        if len(results) >= ef and -neg_sim < results[0][0]:
            break
        row = adj[node]
        fresh = [int(nb) for nb in row[: deg[node]] if not visited[nb]]
        if not fresh:
            continue
        for nb in fresh:
            visited[nb] = 1
        sims = vectors[fresh].astype(np.float64) @ q
        for nb, sim in zip(fresh, sims):
            sim = float(sim)
            if len(results) < ef or sim > results[0][0]:
                heapq.heappush(candidates, (-sim, nb))
                if eligible is None or eligible[nb]:
                    heapq.heappush(results, (sim, nb))
                    if len(results) > ef:
                        heapq.heappop(results)

    out_sims = np.array([s for s, _ in results], dtype=np.float64)
    out_ids = np.array([i for _, i in results], dtype=np.int64)
    order = np.lexsort((out_ids, -out_sims))
    return out_ids[order], out_sims[order]
