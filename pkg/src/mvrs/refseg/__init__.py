"""Referring-segmentation core: candidate-set losses and matching,
inference-time selection, chunked video processing, run-length masks,
and region/boundary quality metrics."""

from .types import (
    LossWeights,
    PredictionCandidate,
    PredictionSet,
    RleMask,
    binary_volume,
    soft_volume,
)
from .losses import (
    bce_loss,
    dice_loss,
    loss_gradients,
    mask_ce_loss,
    match_cost,
    select_best,
    total_loss,
)
from .rle import rle_decode, rle_encode
from .metrics import boundary_f, default_boundary_radius, iou, j_and_f
from .inference import (
    ChunkResult,
    ExplainResult,
    StubMaskPredictor,
    chunk_frames,
    explain_video,
    infer_select,
    iter_explain_chunks,
    predict_masks,
)
from .artifact import MaskArtifact, load_artifact, write_artifact

__all__ = [
    "LossWeights",
    "PredictionCandidate",
    "PredictionSet",
    "RleMask",
    "binary_volume",
    "soft_volume",
    "bce_loss",
    "dice_loss",
    "loss_gradients",
    "mask_ce_loss",
    "match_cost",
    "select_best",
    "total_loss",
    "rle_decode",
    "rle_encode",
    "boundary_f",
    "default_boundary_radius",
    "iou",
    "j_and_f",
    "ChunkResult",
    "ExplainResult",
    "StubMaskPredictor",
    "chunk_frames",
    "explain_video",
    "infer_select",
    "iter_explain_chunks",
    "predict_masks",
    "MaskArtifact",
    "load_artifact",
    "write_artifact",
]
