"""Query pipeline: text -> embedding -> segment hits -> ranked videos.

A video's score is the maximum over its segment hits (one strong moment
makes the video relevant); the best segment and its start timestamp are
taken from that argmax.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import embedding
from .index import AnnParams, MetadataFilter, SearchHit, VectorIndex
from .model import QueryResult, VideoAsset


@dataclass(frozen=True)
class QueryRequest:
    text: str
    k_videos: int = 10
    filter: Optional[MetadataFilter] = None
    candidate_multiplier: int = 8

    def __post_init__(self):
        if self.k_videos < 0:
            raise ValueError(f"k_videos must be >= 0, got {self.k_videos}")
        if self.candidate_multiplier < 1:
            raise ValueError(
                f"candidate_multiplier must be >= 1, got {self.candidate_multiplier}"
            )


def aggregate_video_scores(
    hits: Sequence[SearchHit], fps_by_video: Mapping[str, float]
) -> list[QueryResult]:
    """Max-pool segment hits per video and rank the videos.

    Hits are expected in (score desc, entry_id asc) order, as produced by
    the index; the first hit seen per video is therefore its best segment.
    Videos tie-break by ascending video_id; ranks run 1..n.
    """
    best: dict[str, SearchHit] = {}
    for hit in hits:
        video_id = hit.segment.video_id
        if video_id not in best or hit.score > best[video_id].score:
            best[video_id] = hit
    ordered = sorted(best.items(), key=lambda item: (-item[1].score, item[0]))
    results = []
    for rank, (video_id, hit) in enumerate(ordered, start=1):
        fps = fps_by_video.get(video_id)
        timestamp = hit.segment.start_frame / fps if fps else 0.0
        results.append(
            QueryResult(
                video_id=video_id,
                score=hit.score,
                best_segment=hit.segment,
                best_timestamp_s=timestamp,
                rank=rank,
            )
        )
    return results


class RetrievalEngine:
    """Read-only facade over one index plus an embedder configuration."""

    def __init__(
        self,
        index: VectorIndex,
        embedder: embedding.EmbedderConfig,
        catalog: Optional[Mapping[str, VideoAsset]] = None,
        use_ann: bool = False,
        ann_params: AnnParams = AnnParams(),
    ):
        self.index = index
        self.embedder = embedder
        self.catalog = dict(catalog) if catalog else None
        self.use_ann = use_ann
        self.ann_params = ann_params

    def _fps_by_video(self) -> dict[str, float]:
        if self.catalog is not None:
            return {vid: asset.fps for vid, asset in self.catalog.items()}
        return self.index.fps_by_video()

    def run_query(self, req: QueryRequest) -> list[QueryResult]:
        if not req.text.strip():
            raise ValueError("query text must be non-empty")
        if req.k_videos == 0:
            return []
        query_vec = embedding.embed_text(self.embedder, req.text)
        fetch = req.k_videos * req.candidate_multiplier
        if self.use_ann:
            params = self.ann_params
            if params.ef_search < fetch:
                params = AnnParams(params.graph_degree, params.ef_construction, fetch)
            hits = self.index.search_ann(query_vec, fetch, req.filter, params)
        else:
            hits = self.index.search_exact(query_vec, fetch, req.filter)
        return aggregate_video_scores(hits, self._fps_by_video())[: req.k_videos]
