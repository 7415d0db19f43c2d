"""Indexing-stage frame preparation: blur filtering, orientation
normalization, and near-duplicate segment grouping.

Frames are 8-bit grayscale images held as 2-D uint8 numpy arrays
(row-major); they arrive as PGM (P5) files or equivalent raw buffers.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .model import FrameRecord, SegmentGroup, VideoMetadata

logger = logging.getLogger(__name__)

GrayImage = np.ndarray  # 2-D uint8, shape (H, W)


@dataclass(frozen=True)
class PreprocessConfig:
    blur_threshold: float = 100.0
    similarity_threshold: float = 0.95

    def __post_init__(self):
        if self.blur_threshold < 0:
            raise ValueError(f"blur_threshold must be >= 0, got {self.blur_threshold}")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError(
                f"similarity_threshold must be in (0, 1], got {self.similarity_threshold}"
            )


@dataclass(frozen=True)
class DropRecord:
    """One dropped frame, for the line-delimited JSON drop log."""

    video_id: str
    frame_index: int
    sharpness: float
    reason: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def as_gray_image(pixels, height: Optional[int] = None, width: Optional[int] = None) -> GrayImage:
    """Coerce raw input into a validated (H, W) uint8 array.

    Accepts a 2-D array, or a flat buffer plus explicit height/width.
    """
    arr = np.asarray(pixels)
    if height is not None or width is not None:
        if height is None or width is None:
            raise ValueError("height and width must be given together")
        if height < 1 or width < 1:
            raise ValueError(f"bad image dims {height}x{width}")
        flat = np.frombuffer(pixels, dtype=np.uint8) if isinstance(pixels, (bytes, bytearray)) else arr.ravel()
        if flat.size != height * width:
            raise ValueError(f"pixel buffer has {flat.size} values, expected {height * width}")
        arr = flat.reshape(height, width)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise ValueError(f"gray image must be 8-bit, got dtype {arr.dtype}")
    return np.ascontiguousarray(arr)


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def parse_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (P5) buffer with 8-bit maxval."""
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise ValueError(f"only 8-bit PGM supported, maxval={maxval}")
    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ValueError(f"PGM raster has {len(raster)} bytes, expected {expected}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def pgm_bytes(img: GrayImage) -> bytes:
    img = as_gray_image(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def write_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img))


def laplacian_variance(img: GrayImage) -> float:
    """Sharpness score: population variance of the 4-neighbour Laplacian.

    Evaluated on interior pixels only (valid convolution, no padding), so
    the image must be at least 3x3.
    """
    img = as_gray_image(img)
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3, got {img.shape[0]}x{img.shape[1]}")
    return float(kernels.laplacian_variance_u8(img))


def filter_blurry(
    frames: Sequence[tuple[FrameRecord, GrayImage]], cfg: PreprocessConfig
) -> tuple[list[tuple[FrameRecord, GrayImage]], list[DropRecord]]:
    """Keep frames whose sharpness reaches the blur threshold.

    Returns (kept, drop_log); kept frames preserve input order and carry
    records with sharpness populated.
    """
    kept: list[tuple[FrameRecord, GrayImage]] = []
    dropped: list[DropRecord] = []
    for rec, img in frames:
        sharpness = laplacian_variance(img)
        rec = dataclasses.replace(rec, sharpness=sharpness)
        if sharpness >= cfg.blur_threshold:
            kept.append((rec, img))
        else:
            dropped.append(
                DropRecord(
                    video_id=rec.video_id,
                    frame_index=rec.frame_index,
                    sharpness=sharpness,
                    reason="blurry",
                )
            )
    return kept, dropped


def write_drop_log(drops: Iterable[DropRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for drop in drops:
            fh.write(json.dumps(drop.to_dict(), sort_keys=True) + "\n")


def rotate_quarter_cw(img: GrayImage, turns: int) -> GrayImage:
    """Rotate clockwise by ``turns`` quarter turns.

    One turn maps source (r, c) of an HxW image to (c, H-1-r) of a WxH one.
    """
    if turns not in (0, 1, 2, 3):
        raise ValueError(f"turns must be in {{0,1,2,3}}, got {turns}")
    img = as_gray_image(img)
    return np.ascontiguousarray(np.rot90(img, k=-turns))


def normalize_orientation(img: GrayImage, meta: VideoMetadata) -> GrayImage:
    """Undo the rotation recorded in the metadata."""
    return rotate_quarter_cw(img, (4 - meta.rotation_quarter_turns) % 4)


def group_similar(
    frames: Sequence[FrameRecord], cfg: PreprocessConfig
) -> list[SegmentGroup]:
    """Collapse runs of near-duplicate frames into segment groups.

    Greedy forward pass: a frame joins the current group iff its cosine
    similarity to the group's running representative reaches the
    threshold; otherwise it starts a new group.  The representative is
    the re-normalized arithmetic mean of member embeddings, recomputed on
    each join.
    """
    groups: list[SegmentGroup] = []
    members: list[FrameRecord] = []
    vec_sum: Optional[np.ndarray] = None
    representative: Optional[np.ndarray] = None

    def flush():
        nonlocal members, vec_sum, representative
        if not members:
            return
        first = members[0]
        groups.append(
            SegmentGroup(
                segment_id=f"{first.video_id}:{first.frame_index:06d}",
                video_id=first.video_id,
                start_frame=first.frame_index,
                end_frame=members[-1].frame_index,
                representative=representative.copy(),
                member_count=len(members),
            )
        )
        members = []
        vec_sum = None
        representative = None

    def renormalized(total: np.ndarray, first: FrameRecord) -> np.ndarray:
        mean = total / len(members)
        norm = float(np.linalg.norm(mean))
        if norm == 0.0:
            # Antipodal members cancel out; fall back to the first member.
            logger.warning(
                "zero-norm mean in segment starting at frame %d of %s; "
                "falling back to first member embedding",
                first.frame_index,
                first.video_id,
            )
            return np.asarray(first.embedding, dtype=np.float64)
        return mean / norm

    for rec in frames:
        if rec.embedding is None:
            raise ValueError(f"frame {rec.frame_index} of {rec.video_id!r} has no embedding")
        vec = np.asarray(rec.embedding, dtype=np.float64)
        if members and rec.video_id != members[0].video_id:
            raise ValueError("group_similar operates on a single video at a time")
        if members and float(vec @ representative) >= cfg.similarity_threshold:
            members.append(rec)
            vec_sum = vec_sum + vec
            representative = renormalized(vec_sum, members[0])
        else:
            flush()
            members = [rec]
            vec_sum = vec.copy()
            representative = renormalized(vec_sum, rec)
    flush()
    return groups
