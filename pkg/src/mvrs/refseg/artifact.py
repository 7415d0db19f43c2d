"""Mask artifact wire form: the JSON document produced by explain runs.

Schema: {video_id, text, H, W, frames: [{frame_index, counts: [...]}],
confidences: [per-chunk float]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from ..errors import MaskFormatError
from .types import RleMask


@dataclass(frozen=True)
class MaskArtifact:
    video_id: str
    text: str
    height: int
    width: int
    masks: tuple[RleMask, ...]  # per frame, in frame order
    confidences: tuple[float, ...]  # per chunk

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "text": self.text,
            "H": self.height,
            "W": self.width,
            "frames": [
                {"frame_index": i, "counts": list(m.counts)}
                for i, m in enumerate(self.masks)
            ],
            "confidences": list(self.confidences),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MaskArtifact":
        try:
            height = int(data["H"])
            width = int(data["W"])
            frames = data["frames"]
            confidences = tuple(float(c) for c in data.get("confidences", ()))
        except (KeyError, TypeError, ValueError) as exc:
            raise MaskFormatError(f"malformed mask artifact: {exc}") from exc
        masks = []
        expected = height * width
        for pos, frame in enumerate(frames):
            counts = frame.get("counts")
            if counts is None or frame.get("frame_index") != pos:
                raise MaskFormatError(
                    f"artifact frame list must be dense; bad entry at position {pos}"
                )
            if sum(counts) != expected:
                raise MaskFormatError(
                    f"frame {pos}: counts sum to {sum(counts)}, expected {expected}"
                )
            masks.append(RleMask(height=height, width=width, counts=tuple(counts)))
        return cls(
            video_id=str(data.get("video_id", "")),
            text=str(data.get("text", "")),
            height=height,
            width=width,
            masks=tuple(masks),
            confidences=confidences,
        )


def write_artifact(artifact: MaskArtifact, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(artifact.to_dict(), fh)
        fh.write("\n")


def load_artifact(path) -> MaskArtifact:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MaskFormatError(f"{path}: not valid JSON: {exc}") from exc
    return MaskArtifact.from_dict(data)


def stream_artifact_json(
    video_id: str,
    text: str,
    height: int,
    width: int,
    chunks: Iterator,
) -> Iterator[str]:
    """Incrementally serialize an artifact while chunks are still being
    computed: header first, then frame entries as each chunk completes,
    confidences last.  The concatenation is the exact artifact JSON."""
    yield (
        '{"video_id": %s, "text": %s, "H": %d, "W": %d, "frames": ['
        % (json.dumps(video_id), json.dumps(text), height, width)
    )
    confidences: list[float] = []
    frame_index = 0
    first = True
    for chunk in chunks:
        parts = []
        for mask in chunk.masks:
            parts.append(
                '%s{"frame_index": %d, "counts": %s}'
                % ("" if first else ", ", frame_index, json.dumps(list(mask.counts)))
            )
            first = False
            frame_index += 1
        confidences.append(chunk.confidence)
        yield "".join(parts)
    yield '], "confidences": %s}' % json.dumps(confidences)
