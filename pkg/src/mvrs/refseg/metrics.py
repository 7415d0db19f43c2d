"""Mask quality metrics: region overlap (IoU / J) and contour accuracy (F).

Boundary pixels are foreground pixels with at least one 4-neighbour that
is background or off-image.  A boundary pixel matches if any counterpart
boundary pixel lies within a Chebyshev radius; F is the harmonic mean of
the two matched fractions.
"""

from __future__ import annotations

import math

import numpy as np

from .types import binary_volume


def iou(a, b) -> float:
    """Intersection over union of two binary volumes; both empty -> 1.0."""
    a = binary_volume(a)
    b = binary_volume(b)
    if a.shape != b.shape:
        raise ValueError(f"mask shape mismatch: {a.shape} vs {b.shape}")
    inter = int(np.logical_and(a, b).sum())
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return inter / union


def _boundary(frame: np.ndarray) -> np.ndarray:
    """Foreground pixels adjacent (4-neighbourhood) to background or edge."""
    fg = frame.astype(bool)
    padded = np.pad(fg, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return fg & ~interior


def _chebyshev_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grow a boolean mask by a Chebyshev radius (square structuring
    element), as two separable 1-D sliding maxima."""
    if radius == 0:
        return mask
    out = mask
    for axis in (0, 1):
        padded = np.pad(
            out, [(radius, radius) if ax == axis else (0, 0) for ax in (0, 1)],
            constant_values=False,
        )
        windows = np.lib.stride_tricks.sliding_window_view(
            padded, 2 * radius + 1, axis=axis
        )
        out = windows.any(axis=-1)
    return out


def default_boundary_radius(height: int, width: int) -> int:
    """Conventional tolerance: 0.75% of the image diagonal, rounded up."""
    return math.ceil(0.0075 * math.hypot(height, width))


def boundary_f(pred, gt, radius_px: int) -> float:
    """Boundary F-measure of one predicted frame against one truth frame."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"mask shape mismatch: {pred.shape} vs {gt.shape}")
    if pred.ndim != 2:
        raise ValueError(f"boundary_f expects single frames, got shape {pred.shape}")
    if radius_px < 0:
        raise ValueError(f"radius_px must be >= 0, got {radius_px}")

    pred_b = _boundary(pred)
    gt_b = _boundary(gt)
    n_pred = int(pred_b.sum())
    n_gt = int(gt_b.sum())
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0

    precision = int((pred_b & _chebyshev_dilate(gt_b, radius_px)).sum()) / n_pred
    recall = int((gt_b & _chebyshev_dilate(pred_b, radius_px)).sum()) / n_gt
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def j_and_f(preds, gts, radius_px: int) -> tuple[float, float, float]:
    """Mean region similarity J, mean contour accuracy F, and their average
    over two equal-length mask sequences."""
    preds = list(preds)
    gts = list(gts)
    if len(preds) != len(gts):
        raise ValueError(f"sequence length mismatch: {len(preds)} vs {len(gts)}")
    if not preds:
        raise ValueError("empty mask sequences")
    j_scores = []
    f_scores = []
    for p, g in zip(preds, gts):
        p = np.asarray(p)
        g = np.asarray(g)
        j_scores.append(iou(p[None, ...], g[None, ...]))
        f_scores.append(boundary_f(p, g, radius_px))
    j = float(np.mean(j_scores))
    f = float(np.mean(f_scores))
    return j, f, (j + f) / 2.0
