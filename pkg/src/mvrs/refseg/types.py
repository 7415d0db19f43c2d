"""Value types for the segmentation subsystem.

Mask volumes are numpy arrays of shape (T, H, W): float64 probabilities
in [0, 1] for soft predictions, uint8 {0, 1} for binary ground truth.
A still image is a volume with T=1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def soft_volume(probs) -> np.ndarray:
    """Validate and coerce a (T, H, W) probability volume."""
    vol = np.asarray(probs, dtype=np.float64)
    if vol.ndim != 3 or min(vol.shape) < 1:
        raise ValueError(f"soft mask volume must be (T, H, W), got shape {vol.shape}")
    if vol.min() < 0.0 or vol.max() > 1.0:
        raise ValueError("soft mask probabilities must lie in [0, 1]")
    return vol


def binary_volume(bits) -> np.ndarray:
    """Validate and coerce a (T, H, W) {0,1} volume."""
    vol = np.asarray(bits)
    if vol.ndim != 3 or min(vol.shape) < 1:
        raise ValueError(f"binary mask volume must be (T, H, W), got shape {vol.shape}")
    if not np.isin(vol, (0, 1)).all():
        raise ValueError("binary mask volume must contain only 0 and 1")
    return vol.astype(np.uint8)


@dataclass(frozen=True)
class LossWeights:
    """Coefficients of the candidate-matching objective.

    include_matched_cls additionally charges the matched candidate a
    positive-class confidence loss (off by default: the objective as
    published charges only the unmatched candidates).
    """

    cls_weight: float = 2.0
    mask_weight: float = 5.0
    dice_weight: float = 5.0
    dice_epsilon: float = 1.0
    prob_clamp: float = 1e-7
    include_matched_cls: bool = False

    def __post_init__(self):
        for name in ("cls_weight", "mask_weight", "dice_weight"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.dice_epsilon > 0:
            raise ValueError("dice_epsilon must be > 0")
        if not 0.0 < self.prob_clamp < 0.5:
            raise ValueError("prob_clamp must be in (0, 0.5)")


@dataclass(frozen=True, eq=False)
class PredictionCandidate:
    """One candidate: a confidence that it is the referred object plus a
    soft mask volume."""

    confidence: float
    mask: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        object.__setattr__(self, "mask", soft_volume(self.mask))


@dataclass(frozen=True, eq=False)
class PredictionSet:
    candidates: tuple[PredictionCandidate, ...]

    def __post_init__(self):
        cands = tuple(self.candidates)
        if len(cands) < 1:
            raise ValueError("a prediction set needs at least one candidate")
        shape = cands[0].mask.shape
        if any(c.mask.shape != shape for c in cands):
            raise ValueError("candidate mask volumes must share one shape")
        object.__setattr__(self, "candidates", cands)

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.candidates[0].mask.shape

    @property
    def confidences(self) -> np.ndarray:
        return np.array([c.confidence for c in self.candidates], dtype=np.float64)


@dataclass(frozen=True)
class RleMask:
    """Run-length form of one binary frame: row-major alternating run
    lengths beginning with the zero run (first count may be 0)."""

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.height < 1 or self.width < 1:
            raise ValueError(f"bad mask dims {self.height}x{self.width}")
        if any(c < 0 for c in self.counts):
            raise ValueError("run lengths must be non-negative")
