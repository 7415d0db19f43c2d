"""Shared fixtures: synthetic corpora, PGM fixture trees, unit vectors."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from mvrs.embedding import EmbedderConfig
from mvrs.index import VectorIndex
from mvrs.model import SegmentGroup, VideoAsset, VideoMetadata
from mvrs.preprocess import write_pgm


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    vecs = rng.normal(size=(n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs


def build_index(vectors: np.ndarray, metadatas=None, fps: float = 25.0) -> VectorIndex:
    """One single-frame segment per vector, video_id v<i>."""
    index = VectorIndex(vectors.shape[1])
    for i, vec in enumerate(vectors):
        md = metadatas[i] if metadatas is not None else VideoMetadata()
        seg = SegmentGroup(
            segment_id=f"s{i:05d}",
            video_id=f"v{i:05d}",
            start_frame=0,
            end_frame=0,
            representative=vec,
            member_count=1,
        )
        index.insert(seg, md, fps=fps)
    return index


def sharp_frame(rng: np.random.Generator, h: int = 16, w: int = 16) -> np.ndarray:
    """A frame with plenty of Laplacian energy (passes the blur filter)."""
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)


def textured_frame(seed: int, h: int = 16, w: int = 16) -> np.ndarray:
    return sharp_frame(np.random.default_rng(seed), h, w)


@pytest.fixture
def embedder16() -> EmbedderConfig:
    return EmbedderConfig(dim=16)


@pytest.fixture
def ingest_fixture(tmp_path: Path):
    """A two-video catalog + frame tree: 'planted' frames repeat one texture
    (one segment); 'varied' frames differ (several segments)."""
    rng = np.random.default_rng(7)
    frames_root = tmp_path / "frames"
    catalog_path = tmp_path / "catalog.jsonl"

    planted_dir = frames_root / "planted"
    varied_dir = frames_root / "varied"
    planted_dir.mkdir(parents=True)
    varied_dir.mkdir(parents=True)

    base = sharp_frame(rng)
    for i in range(6):
        write_pgm(planted_dir / f"{i:06d}.pgm", base)
    for i in range(6):
        write_pgm(varied_dir / f"{i:06d}.pgm", sharp_frame(rng))

    assets = [
        VideoAsset(video_id="planted", source_uri="mem://planted", fps=4.0, frame_count=6),
        VideoAsset(video_id="varied", source_uri="mem://varied", fps=4.0, frame_count=6),
    ]
    with open(catalog_path, "w", encoding="utf-8") as fh:
        for asset in assets:
            fh.write(json.dumps(asset.to_dict()) + "\n")
    return {"catalog": catalog_path, "frames": frames_root, "assets": assets, "base_frame": base}
