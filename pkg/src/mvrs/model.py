"""Shared domain types: video assets, frames, embeddings, segments, results.

All values here are immutable after construction and safe to share across
threads.  Catalog interchange is line-delimited JSON, one asset per line,
with field names matching the dataclass fields.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

UNIT_NORM_TOL = 1e-6


def ensure_unit_vector(values, *, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    """Validate that ``values`` is a finite 1-D unit vector; returns it as float64."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"embedding must be a 1-D vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or abs(norm - 1.0) > tol:
        raise ValueError(f"embedding is not unit-norm (|v|={norm!r})")
    return v


@dataclass(frozen=True)
class VideoMetadata:
    """Provenance attached to a video: where, when, how deep, what, doing what."""

    location: Optional[str] = None
    capture_time: Optional[datetime] = None
    depth_meters: Optional[float] = None
    species_tags: frozenset[str] = frozenset()
    behavior_tags: frozenset[str] = frozenset()
    rotation_quarter_turns: int = 0

    def __post_init__(self):
        if self.rotation_quarter_turns not in (0, 1, 2, 3):
            raise ValueError(
                f"rotation_quarter_turns must be in {{0,1,2,3}}, "
                f"got {self.rotation_quarter_turns}"
            )
        object.__setattr__(self, "species_tags", frozenset(self.species_tags))
        object.__setattr__(self, "behavior_tags", frozenset(self.behavior_tags))

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "capture_time": None
            if self.capture_time is None
            else self.capture_time.astimezone(timezone.utc).isoformat(),
            "depth_meters": self.depth_meters,
            "species_tags": sorted(self.species_tags),
            "behavior_tags": sorted(self.behavior_tags),
            "rotation_quarter_turns": self.rotation_quarter_turns,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VideoMetadata":
        ts = data.get("capture_time")
        return cls(
            location=data.get("location"),
            capture_time=None if ts is None else parse_utc(ts),
            depth_meters=data.get("depth_meters"),
            species_tags=frozenset(data.get("species_tags") or ()),
            behavior_tags=frozenset(data.get("behavior_tags") or ()),
            rotation_quarter_turns=int(data.get("rotation_quarter_turns", 0)),
        )


def parse_utc(text: str) -> datetime:
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class VideoAsset:
    """One catalogued video; frames are ingested separately."""

    video_id: str
    source_uri: str
    fps: float
    frame_count: int
    metadata: VideoMetadata = field(default_factory=VideoMetadata)

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if not self.fps > 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")
        if self.frame_count < 0:
            raise ValueError(f"frame_count must be >= 0, got {self.frame_count}")

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "source_uri": self.source_uri,
            "fps": self.fps,
            "frame_count": self.frame_count,
            "metadata": self.metadata.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VideoAsset":
        return cls(
            video_id=data["video_id"],
            source_uri=data.get("source_uri", ""),
            fps=float(data["fps"]),
            frame_count=int(data["frame_count"]),
            metadata=VideoMetadata.from_dict(data.get("metadata") or {}),
        )


@dataclass(frozen=True, eq=False)
class FrameRecord:
    """One decoded frame of a video, before or after embedding."""

    video_id: str
    frame_index: int
    timestamp_s: float
    sharpness: float = float("nan")
    embedding: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be >= 0, got {self.frame_index}")
        if self.timestamp_s < 0:
            raise ValueError(f"timestamp_s must be >= 0, got {self.timestamp_s}")


@dataclass(frozen=True, eq=False)
class SegmentGroup:
    """A contiguous run of near-duplicate frames collapsed to one vector."""

    segment_id: str
    video_id: str
    start_frame: int
    end_frame: int
    representative: np.ndarray
    member_count: int

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError(
                f"segment range inverted: [{self.start_frame}, {self.end_frame}]"
            )
        if self.member_count < 1:
            raise ValueError(f"member_count must be >= 1, got {self.member_count}")

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "video_id": self.video_id,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "member_count": self.member_count,
        }


@dataclass(frozen=True, eq=False)
class QueryResult:
    """One ranked video hit."""

    video_id: str
    score: float
    best_segment: SegmentGroup
    best_timestamp_s: float
    rank: int


@dataclass(frozen=True)
class Violation:
    """One catalog-consistency breach; data, not a fault."""

    code: str
    message: str
    video_id: Optional[str] = None
    frame_index: Optional[int] = None


def validate_catalog(
    assets: Iterable[VideoAsset], frames: Iterable[FrameRecord]
) -> list[Violation]:
    """Cross-check assets and frame records; empty result means consistent."""
    assets = list(assets)
    frames = list(frames)
    report: list[Violation] = []

    by_id: dict[str, VideoAsset] = {}
    for asset in assets:
        if asset.video_id in by_id:
            report.append(
                Violation(
                    code="duplicate_video_id",
                    message=f"video_id {asset.video_id!r} appears more than once",
                    video_id=asset.video_id,
                )
            )
            continue
        by_id[asset.video_id] = asset

    frames_by_video: dict[str, list[FrameRecord]] = {}
    for rec in frames:
        frames_by_video.setdefault(rec.video_id, []).append(rec)

    for video_id, recs in frames_by_video.items():
        asset = by_id.get(video_id)
        if asset is None:
            report.append(
                Violation(
                    code="unknown_video",
                    message=f"frames reference unknown video_id {video_id!r}",
                    video_id=video_id,
                )
            )
            continue
        seen: set[int] = set()
        for rec in recs:
            if rec.frame_index in seen:
                report.append(
                    Violation(
                        code="duplicate_frame_index",
                        message=f"frame index {rec.frame_index} of {video_id!r} repeats",
                        video_id=video_id,
                        frame_index=rec.frame_index,
                    )
                )
            seen.add(rec.frame_index)
            if rec.frame_index >= asset.frame_count:
                report.append(
                    Violation(
                        code="frame_index_out_of_range",
                        message=(
                            f"frame index {rec.frame_index} >= frame_count "
                            f"{asset.frame_count} of {video_id!r}"
                        ),
                        video_id=video_id,
                        frame_index=rec.frame_index,
                    )
                )
            expected = rec.frame_index / asset.fps
            if not math.isclose(rec.timestamp_s, expected, rel_tol=1e-9, abs_tol=1e-9):
                report.append(
                    Violation(
                        code="timestamp_mismatch",
                        message=(
                            f"frame {rec.frame_index} of {video_id!r} has timestamp "
                            f"{rec.timestamp_s}, expected {expected}"
                        ),
                        video_id=video_id,
                        frame_index=rec.frame_index,
                    )
                )
            if rec.embedding is not None:
                try:
                    ensure_unit_vector(rec.embedding)
                except ValueError as exc:
                    report.append(
                        Violation(
                            code="embedding_not_unit",
                            message=f"frame {rec.frame_index} of {video_id!r}: {exc}",
                            video_id=video_id,
                            frame_index=rec.frame_index,
                        )
                    )
        if len(recs) != asset.frame_count:
            report.append(
                Violation(
                    code="frame_count_mismatch",
                    message=(
                        f"{video_id!r} has {len(recs)} frame records but "
                        f"frame_count {asset.frame_count}"
                    ),
                    video_id=video_id,
                )
            )
    return report


def load_catalog(path) -> list[VideoAsset]:
    """Read a line-delimited JSON catalog (one asset per line)."""
    assets = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                assets.append(VideoAsset.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: bad catalog entry on line {lineno}: {exc}") from exc
    return assets


def dump_catalog(assets: Iterable[VideoAsset], path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for asset in assets:
            fh.write(json.dumps(asset.to_dict(), sort_keys=True) + "\n")
