"""Candidate-matching losses over soft mask volumes.

The matching cost of one candidate against the single ground-truth
object is mask_weight * per-pixel-CE + dice_weight * soft-dice.  The
training objective charges the best-matching candidate its matching
cost and every other candidate a confidence loss toward 0.
"""

from __future__ import annotations

import numpy as np

from .types import LossWeights, PredictionSet, binary_volume, soft_volume


def _clamp(p, w: LossWeights):
    return np.clip(p, w.prob_clamp, 1.0 - w.prob_clamp)


def _check_dims(pred: np.ndarray, gt: np.ndarray) -> None:
    if pred.shape != gt.shape:
        raise ValueError(f"mask shape mismatch: {pred.shape} vs {gt.shape}")


def bce_loss(prob: float, target: int, w: LossWeights = LossWeights()) -> float:
    """Binary cross-entropy of one probability against a {0,1} target."""
    q = float(_clamp(prob, w))
    if target:
        return -float(np.log(q))
    return -float(np.log1p(-q))


def mask_ce_loss(pred, gt, w: LossWeights = LossWeights()) -> float:
    """Mean per-pixel binary cross-entropy over the whole volume."""
    pred = soft_volume(pred)
    gt = binary_volume(gt)
    _check_dims(pred, gt)
    q = _clamp(pred, w)
    g = gt.astype(np.float64)
    per_pixel = -(g * np.log(q) + (1.0 - g) * np.log1p(-q))
    return float(per_pixel.mean())


def dice_loss(pred, gt, w: LossWeights = LossWeights()) -> float:
    """One minus the smoothed Dice overlap, summed over the whole volume."""
    pred = soft_volume(pred)
    gt = binary_volume(gt)
    _check_dims(pred, gt)
    g = gt.astype(np.float64)
    overlap = 2.0 * float((pred * g).sum()) + w.dice_epsilon
    total = float(pred.sum()) + float(g.sum()) + w.dice_epsilon
    return 1.0 - overlap / total


def match_cost(candidate, gt, w: LossWeights = LossWeights()) -> float:
    """Weighted mask-quality cost of one candidate (confidence excluded)."""
    return w.mask_weight * mask_ce_loss(candidate.mask, gt, w) + w.dice_weight * dice_loss(
        candidate.mask, gt, w
    )


def select_best(pset: PredictionSet, gt, w: LossWeights = LossWeights()) -> int:
    """Index of the candidate with the lowest matching cost (ties: lowest index)."""
    costs = [match_cost(c, gt, w) for c in pset.candidates]
    return int(np.argmin(costs))


def total_loss(pset: PredictionSet, gt, w: LossWeights = LossWeights()) -> tuple[float, int]:
    """Training loss of a prediction set and the matched candidate index.

    loss = match_cost(best) + sum over other candidates of
    cls_weight * bce(confidence, 0); optionally plus the matched
    candidate's own positive confidence loss (include_matched_cls).
    """
    gt = binary_volume(gt)
    matched = select_best(pset, gt, w)
    loss = match_cost(pset.candidates[matched], gt, w)
    for j, cand in enumerate(pset.candidates):
        if j == matched:
            if w.include_matched_cls:
                loss += w.cls_weight * bce_loss(cand.confidence, 1, w)
        else:
            loss += w.cls_weight * bce_loss(cand.confidence, 0, w)
    return loss, matched


def loss_gradients(
    pset: PredictionSet, gt, w: LossWeights = LossWeights()
) -> tuple[np.ndarray, np.ndarray, int]:
    """Analytic gradients of total_loss w.r.t. every confidence and every
    predicted mask probability.

    The matched index is held fixed (piecewise-smooth regime), and all
    probabilities are assumed strictly inside the clamp interval so the
    clamp is inactive at the evaluation point.

    Returns (confidence_grads [N], mask_grads [N, T, H, W], matched).
    """
    gt = binary_volume(gt)
    matched = select_best(pset, gt, w)
    n = len(pset)
    conf_grads = np.zeros(n, dtype=np.float64)
    mask_grads = np.zeros((n,) + pset.shape, dtype=np.float64)

    for j, cand in enumerate(pset.candidates):
        if j == matched:
            if w.include_matched_cls:
                conf_grads[j] = -w.cls_weight / cand.confidence
        else:
            conf_grads[j] = w.cls_weight / (1.0 - cand.confidence)

    cand = pset.candidates[matched]
    p = cand.mask
    g = gt.astype(np.float64)
    n_pixels = p.size

    # Per-pixel CE term: d/dp of -(g ln p + (1-g) ln(1-p)) / n_pixels
    ce_grad = (-g / p + (1.0 - g) / (1.0 - p)) / n_pixels

    # Dice term: D = 1 - A/B with A = 2*sum(p*g) + eps, B = sum(p) + sum(g) + eps
    a = 2.0 * float((p * g).sum()) + w.dice_epsilon
    b = float(p.sum()) + float(g.sum()) + w.dice_epsilon
    dice_grad = -(2.0 * g * b - a) / (b * b)

    mask_grads[matched] = w.mask_weight * ce_grad + w.dice_weight * dice_grad
    return conf_grads, mask_grads, matched
