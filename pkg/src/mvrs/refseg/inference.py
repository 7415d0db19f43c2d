"""Inference-time mask production: chunked processing, candidate
selection by confidence, and the deterministic reference predictor.

Videos are processed in fixed-size frame chunks (32 by default) to bound
memory; each chunk yields a prediction set, the highest-confidence
candidate is selected, and a chunk whose best confidence stays below 0.5
emits empty masks ("no referred object here").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Protocol, Sequence

import numpy as np

from .. import embedding
from ..errors import PredictorError
from ..index import cosine_similarity
from ..preprocess import GrayImage, as_gray_image
from .rle import rle_encode
from .types import PredictionCandidate, PredictionSet, RleMask

MAX_CHUNK = 32
CONFIDENCE_FLOOR = 0.5
BINARIZE_THRESHOLD = 0.5


def chunk_frames(total: int, chunk: int = MAX_CHUNK) -> list[tuple[int, int]]:
    """Partition [0, total) into consecutive [start, end) ranges of length
    ``chunk``, with a shorter final remainder."""
    if chunk < 1:
        raise ValueError(f"chunk must be >= 1, got {chunk}")
    if total < 0:
        raise ValueError(f"total must be >= 0, got {total}")
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


class MaskPredictor(Protocol):
    def predict(self, frames: Sequence[GrayImage], text: str) -> PredictionSet: ...


class StubMaskPredictor:
    """Deterministic reference predictor.

    Produces five candidates whose masks are intensity bands of width 51
    (candidate k covers pixels with value in [k*51, (k+1)*51)); each
    candidate's confidence rescales the cosine score between the query
    embedding and the embedding of the chunk's first frame masked to the
    band.
    """

    n_candidates = 5
    band_width = 51

    def __init__(self, embedder: embedding.EmbedderConfig):
        self.embedder = embedder

    def predict(self, frames: Sequence[GrayImage], text: str) -> PredictionSet:
        return predict_masks(self, frames, text)

    def _candidates(self, frames: list[np.ndarray], text: str) -> PredictionSet:
        text_vec = embedding.embed_text(self.embedder, text)
        stack = np.stack(frames)
        candidates = []
        for k in range(self.n_candidates):
            lo, hi = k * self.band_width, (k + 1) * self.band_width
            band = ((stack >= lo) & (stack < hi)).astype(np.float64)
            masked_first = (frames[0] * band[0]).astype(np.uint8)
            frame_vec = embedding.embed_frame(self.embedder, masked_first)
            confidence = (1.0 + cosine_similarity(text_vec, frame_vec)) / 2.0
            candidates.append(PredictionCandidate(confidence=confidence, mask=band))
        return PredictionSet(candidates=tuple(candidates))


def predict_masks(
    predictor: StubMaskPredictor, frames: Sequence[GrayImage], text: str
) -> PredictionSet:
    """Run the reference predictor on one chunk of at most 32 frames."""
    frames = [as_gray_image(f) for f in frames]
    if not frames:
        raise ValueError("cannot predict on an empty chunk")
    if len(frames) > MAX_CHUNK:
        raise ValueError(f"chunk of {len(frames)} frames exceeds the maximum {MAX_CHUNK}")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise ValueError("all frames in a chunk must share one shape")
    return predictor._candidates(frames, text)


def infer_select(pset: PredictionSet) -> tuple[int, list[RleMask]]:
    """Pick the highest-confidence candidate (ties: lowest index) and
    encode its mask, binarized at probability >= 0.5, frame by frame."""
    idx = int(np.argmax(pset.confidences))
    mask = pset.candidates[idx].mask
    frames = (mask >= BINARIZE_THRESHOLD).astype(np.uint8)
    return idx, [rle_encode(frame) for frame in frames]


@dataclass(frozen=True)
class ChunkResult:
    start: int
    end: int
    confidence: float
    masks: list[RleMask]  # one per frame; all-zero when below the floor


@dataclass(frozen=True)
class ExplainResult:
    masks: list[RleMask]  # one per input frame
    confidences: list[float]  # one per chunk


def iter_explain_chunks(
    predictor, frames: Sequence[GrayImage], text: str, chunk: int = MAX_CHUNK
) -> Iterator[ChunkResult]:
    """Yield per-chunk selections in frame order (the streaming surface)."""
    frames = [as_gray_image(f) for f in frames]
    for start, end in chunk_frames(len(frames), chunk):
        window = frames[start:end]
        try:
            pset = predictor.predict(window, text)
        except Exception as exc:
            raise PredictorError(
                f"mask predictor failed on frames [{start}, {end})"
            ) from exc
        idx, masks = infer_select(pset)
        confidence = pset.candidates[idx].confidence
        if confidence < CONFIDENCE_FLOOR:
            h, w = window[0].shape
            masks = [rle_encode(np.zeros((h, w), dtype=np.uint8)) for _ in window]
        yield ChunkResult(start=start, end=end, confidence=confidence, masks=masks)


def explain_video(
    predictor, frames: Sequence[GrayImage], text: str, chunk: int = MAX_CHUNK
) -> ExplainResult:
    """Chunked selection over a whole video: one mask per frame plus the
    selected confidence per chunk."""
    masks: list[RleMask] = []
    confidences: list[float] = []
    for result in iter_explain_chunks(predictor, frames, text, chunk):
        masks.extend(result.masks)
        confidences.append(result.confidence)
    return ExplainResult(masks=masks, confidences=confidences)
