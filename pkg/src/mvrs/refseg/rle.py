"""Run-length encoding of binary mask frames.

Row-major scan; counts alternate background/foreground run lengths and
always begin with the background run, so a mask starting with foreground
gets a leading 0.  decode(encode(m)) == m.
"""

from __future__ import annotations

import numpy as np

from ..errors import MaskFormatError
from .types import RleMask


def rle_encode(frame) -> RleMask:
    """Encode one binary (H, W) frame."""
    arr = np.asarray(frame)
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise ValueError(f"expected a 2-D binary frame, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("mask frame must contain only 0 and 1")
    h, w = arr.shape
    flat = arr.astype(np.int8).ravel()
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    runs = np.diff(np.concatenate(([0], boundaries, [flat.size])))
    counts = runs.tolist()
    if flat[0] == 1:
        counts.insert(0, 0)
    return RleMask(height=h, width=w, counts=tuple(counts))


def rle_decode(rle: RleMask) -> np.ndarray:
    """Decode back to a (H, W) uint8 frame; counts must sum to H*W."""
    total = sum(rle.counts)
    expected = rle.height * rle.width
    if total != expected:
        raise MaskFormatError(
            f"run lengths sum to {total}, expected {expected} "
            f"for a {rle.height}x{rle.width} mask"
        )
    values = np.zeros(len(rle.counts), dtype=np.uint8)
    values[1::2] = 1
    flat = np.repeat(values, np.asarray(rle.counts, dtype=np.int64))
    return flat.reshape(rle.height, rle.width)
