# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: byte hashing, splitmix64 fill, Laplacian variance,
and graph-layer traversal for approximate search.

Surface mirrors mvrs.kernels._pure; integer kernels are bitwise-identical.
"""

import numpy as np


def fnv1a64(const unsigned char[::1] data):
    """64-bit FNV-1a hash of a byte string."""
    cdef unsigned long long h = 14695981039346656037ULL
    cdef Py_ssize_t i, n = data.shape[0]
    for i in range(n):
        h = (h ^ data[i]) * 1099511628211ULL
    return h


def splitmix64_fill(unsigned long long seed, Py_ssize_t n):
    """First n outputs of the splitmix64 generator, as uint64."""
    out = np.empty(n, dtype=np.uint64)
    cdef unsigned long long[::1] view = out
    cdef unsigned long long state = seed, z
    cdef Py_ssize_t i
    for i in range(n):
        state = state + 0x9E3779B97F4A7C15ULL
        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        z = z ^ (z >> 31)
        view[i] = z
    return out


def laplacian_variance_u8(const unsigned char[:, ::1] img):
    """Population variance of the 4-neighbour Laplacian on interior pixels."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t r, c
    cdef double cnt = <double>((h - 2) * (w - 2))
    cdef double resp, total = 0.0, mean, acc = 0.0, d
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            total += (<double>img[r - 1, c] + <double>img[r + 1, c]
                      + <double>img[r, c - 1] + <double>img[r, c + 1]
                      - 4.0 * <double>img[r, c])
    mean = total / cnt
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            resp = (<double>img[r - 1, c] + <double>img[r + 1, c]
                    + <double>img[r, c - 1] + <double>img[r, c + 1]
                    - 4.0 * <double>img[r, c])
            d = resp - mean
            acc += d * d
    return acc / cnt


cdef inline double _dot(const float[:, ::1] vectors, Py_ssize_t row,
                        const float[::1] query, Py_ssize_t dim) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(dim):
        acc += <double>vectors[row, i] * <double>query[i]
    return acc


cdef inline void _max_push(double* sims, long long* ids, Py_ssize_t* size,
                           double sim, long long node) nogil:
    cdef Py_ssize_t i = size[0], parent
    sims[i] = sim
    ids[i] = node
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if sims[parent] >= sims[i]:
            break
        sims[parent], sims[i] = sims[i], sims[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent


cdef inline void _max_pop(double* sims, long long* ids, Py_ssize_t* size) nogil:
    cdef Py_ssize_t i = 0, child, n
    size[0] -= 1
    n = size[0]
    sims[0] = sims[n]
    ids[0] = ids[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and sims[child + 1] > sims[child]:
            child += 1
        if sims[i] >= sims[child]:
            break
        sims[i], sims[child] = sims[child], sims[i]
        ids[i], ids[child] = ids[child], ids[i]
        i = child


cdef inline void _min_push(double* sims, long long* ids, Py_ssize_t* size,
                           double sim, long long node) nogil:
    cdef Py_ssize_t i = size[0], parent
    sims[i] = sim
    ids[i] = node
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if sims[parent] <= sims[i]:
            break
        sims[parent], sims[i] = sims[i], sims[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent


cdef inline void _min_pop(double* sims, long long* ids, Py_ssize_t* size) nogil:
    cdef Py_ssize_t i = 0, child, n
    size[0] -= 1
    n = size[0]
    sims[0] = sims[n]
    ids[0] = ids[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and sims[child + 1] < sims[child]:
            child += 1
        if sims[i] <= sims[child]:
            break
        sims[i], sims[child] = sims[child], sims[i]
        ids[i], ids[child] = ids[child], ids[i]
        i = child


cdef inline double _dot_rows(const float[:, ::1] vectors, Py_ssize_t a,
                             Py_ssize_t b, Py_ssize_t dim) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(dim):
        acc += <double>vectors[a, i] * <double>vectors[b, i]
    return acc


def select_diverse(const float[:, ::1] vectors,
                   const long long[::1] cand_ids,
                   const double[::1] cand_sims,
                   Py_ssize_t bound,
                   double alpha=1.0):
    """Diversity-aware neighbour selection (see _pure for the contract)."""
    cdef Py_ssize_t m = cand_ids.shape[0], dim = vectors.shape[1]
    if m <= bound:
        return np.asarray(cand_ids, dtype=np.int64).copy()
    sel_arr = np.empty(bound, dtype=np.int64)
    keep_arr = np.zeros(m, dtype=np.uint8)
    cdef long long[::1] sel = sel_arr
    cdef unsigned char[::1] keep = keep_arr
    cdef Py_ssize_t nsel = 0, i, j
    cdef double reject_at, a2 = alpha * alpha
    cdef bint diverse
    for i in range(m):
        if nsel == bound:
            break
        reject_at = 1.0 - (1.0 - cand_sims[i]) / a2
        diverse = True
        for j in range(nsel):
            if _dot_rows(vectors, cand_ids[i], sel[j], dim) >= reject_at:
                diverse = False
                break
        if diverse:
            sel[nsel] = cand_ids[i]
            keep[i] = 1
            nsel += 1
    for i in range(m):
        if nsel == bound:
            break
        if not keep[i]:
            sel[nsel] = cand_ids[i]
            nsel += 1
    return sel_arr[:nsel].copy()


def hnsw_search_layer(const float[:, ::1] vectors,
                      const int[:, ::1] adj,
                      const int[::1] deg,
                      const long long[::1] entry_ids,
                      const float[::1] query,
                      Py_ssize_t ef,
                      unsigned char[::1] visited,
                      eligible=None):
    """Best-first traversal of one graph layer (see _pure for the contract)."""
    cdef Py_ssize_t n = vectors.shape[0], dim = vectors.shape[1]
    cdef const unsigned char[::1] elig
    cdef bint has_elig = eligible is not None
    if has_elig:
        elig = eligible

    cand_sims_arr = np.empty(n, dtype=np.float64)
    cand_ids_arr = np.empty(n, dtype=np.int64)
    res_sims_arr = np.empty(ef + 1, dtype=np.float64)
    res_ids_arr = np.empty(ef + 1, dtype=np.int64)
    cdef double[::1] cand_sims = cand_sims_arr
    cdef long long[::1] cand_ids = cand_ids_arr
    cdef double[::1] res_sims = res_sims_arr
    cdef long long[::1] res_ids = res_ids_arr
    cdef Py_ssize_t nc = 0, nr = 0

    cdef Py_ssize_t i, j
    cdef long long node, nb
    cdef double sim

    for i in range(entry_ids.shape[0]):
        node = entry_ids[i]
        if visited[node]:
            continue
        visited[node] = 1
        sim = _dot(vectors, node, query, dim)
        _max_push(&cand_sims[0], &cand_ids[0], &nc, sim, node)
        if not has_elig or elig[node]:
            _min_push(&res_sims[0], &res_ids[0], &nr, sim, node)
            if nr > ef:
                _min_pop(&res_sims[0], &res_ids[0], &nr)

    while nc > 0:
        sim = cand_sims[0]
        node = cand_ids[0]
        _max_pop(&cand_sims[0], &cand_ids[0], &nc)
        if nr >= ef and sim < res_sims[0]:
            break
        for j in range(deg[node]):
            nb = adj[node, j]
            if visited[nb]:
                continue
            visited[nb] = 1
            sim = _dot(vectors, nb, query, dim)
            if nr < ef or sim > res_sims[0]:
                _max_push(&cand_sims[0], &cand_ids[0], &nc, sim, nb)
                if not has_elig or elig[nb]:
                    _min_push(&res_sims[0], &res_ids[0], &nr, sim, nb)
                    if nr > ef:
                        _min_pop(&res_sims[0], &res_ids[0], &nr)

    out_sims = res_sims_arr[:nr].copy()
    out_ids = res_ids_arr[:nr].copy()
    order = np.lexsort((out_ids, -out_sims))
    return out_ids[order], out_sims[order]
