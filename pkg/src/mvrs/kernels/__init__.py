"""Kernel backend selection.

The hot inner loops (graph-layer traversal for approximate search, FNV-1a
byte hashing, splitmix64 sequence fill, Laplacian variance) exist twice:
a compiled Cython extension (``mvrs.kernels._core``) and a pure
NumPy/Python module (``mvrs.kernels._pure``) with the same surface.  The
compiled backend is preferred at import; set MVRS_PURE_PYTHON=1 to force
the fallback.  Both backends produce bitwise-identical integer streams
(hashing / splitmix), so embeddings do not depend on the backend.
"""

import os

from . import _pure

BACKEND = "pure"
_impl = _pure

if os.environ.get("MVRS_PURE_PYTHON", "") != "1":
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass

fnv1a64 = _impl.fnv1a64
splitmix64_fill = _impl.splitmix64_fill
laplacian_variance_u8 = _impl.laplacian_variance_u8
hnsw_search_layer = _impl.hnsw_search_layer
select_diverse = _impl.select_diverse
