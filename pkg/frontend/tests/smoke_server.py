"""Fixture-backed server for the frontend smoke test.

Builds a corpus where one video's segment vector equals the embedding of
the smoke query ("a shark"), retains real frames for the explain path,
and serves it over HTTP.

Usage: python tests/smoke_server.py --port 8799 --data /tmp/smoke
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import uvicorn

from mvrs.embedding import EmbedderConfig, embed_frame, embed_text
from mvrs.index import VectorIndex
from mvrs.model import SegmentGroup, VideoMetadata
from mvrs.preprocess import write_pgm
from mvrs.service import ServiceConfig, create_app

DIM = 16
QUERY = "a shark"
PLANTED = "planted-shark"
FRAME_COUNT = 40


def build_fixture(data_dir: Path) -> None:
    rng = np.random.default_rng(99)
    cfg = EmbedderConfig(dim=DIM)
    index = VectorIndex(DIM)

    def store_frames(video_id: str) -> list[np.ndarray]:
        frame_dir = data_dir / "frames" / video_id
        frame_dir.mkdir(parents=True, exist_ok=True)
        frames = []
        for i in range(FRAME_COUNT):
            img = rng.integers(0, 256, size=(12, 16), dtype=np.uint8)
            write_pgm(frame_dir / f"{i:06d}.pgm", img)
            frames.append(img)
        return frames

    for video_id in (PLANTED, "bycatch-a", "bycatch-b"):
        frames = store_frames(video_id)
        if video_id == PLANTED:
            vector = embed_text(cfg, QUERY)
        else:
            vector = embed_frame(cfg, frames[0])
        index.insert(
            SegmentGroup(
                segment_id=f"{video_id}:000000",
                video_id=video_id,
                start_frame=0,
                end_frame=FRAME_COUNT - 1,
                representative=vector,
                member_count=FRAME_COUNT,
            ),
            VideoMetadata(location="HK", species_tags=frozenset({"shark"})),
            fps=8.0,
        )
    index.save(data_dir / "index.mvrs")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--data", required=True)
    args = parser.parse_args()

    data_dir = Path(args.data)
    build_fixture(data_dir)
    config = ServiceConfig(
        listen_port=args.port,
        data_dir=str(data_dir),
        index_path=str(data_dir / "index.mvrs"),
        embedder=EmbedderConfig(dim=DIM),
    )
    uvicorn.run(create_app(config), host="127.0.0.1", port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
