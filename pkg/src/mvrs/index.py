"""Segment-vector index: exact and approximate filtered top-k search plus
binary persistence.

File format (little-endian): magic "MVRS", format version u16 (=1),
dim u32, entry count u64, then count*dim float32 vectors, then an entry
table of (entry_id u64, segment_id, video_id) with u32-length-prefixed
UTF-8 strings.  A line-delimited JSON sidecar at <path>.meta.jsonl keyed
by entry_id carries the segment span, per-video fps, and the metadata
snapshot used for filtering.
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CorruptIndexError
from .hnsw import HnswGraph
from .model import SegmentGroup, VideoMetadata, ensure_unit_vector, parse_utc

MAGIC = b"MVRS"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class AnnParams:
    graph_degree: int = 16
    ef_construction: int = 200
    ef_search: int = 64


@dataclass(frozen=True)
class MetadataFilter:
    """Conjunctive eligibility clauses; absent metadata never matches."""

    location_equals: Optional[str] = None
    time_range: Optional[tuple] = None  # (from, to) inclusive UTC datetimes
    depth_range: Optional[tuple[float, float]] = None  # (min, max) meters
    species_any: Optional[frozenset[str]] = None
    behavior_any: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.time_range is not None and self.time_range[0] > self.time_range[1]:
            raise ValueError("time_range is inverted")
        if self.depth_range is not None and self.depth_range[0] > self.depth_range[1]:
            raise ValueError("depth_range is inverted")
        if self.species_any is not None:
            object.__setattr__(self, "species_any", frozenset(self.species_any))
        if self.behavior_any is not None:
            object.__setattr__(self, "behavior_any", frozenset(self.behavior_any))

    @property
    def empty(self) -> bool:
        return all(
            clause is None
            for clause in (
                self.location_equals,
                self.time_range,
                self.depth_range,
                self.species_any,
                self.behavior_any,
            )
        )

    def matches(self, md: VideoMetadata) -> bool:
        if self.location_equals is not None:
            if md.location is None or md.location != self.location_equals:
                return False
        if self.time_range is not None:
            if md.capture_time is None:
                return False
            lo, hi = self.time_range
            if not lo <= md.capture_time <= hi:
                return False
        if self.depth_range is not None:
            if md.depth_meters is None:
                return False
            lo, hi = self.depth_range
            if not lo <= md.depth_meters <= hi:
                return False
        if self.species_any is not None and not (self.species_any & md.species_tags):
            return False
        if self.behavior_any is not None and not (self.behavior_any & md.behavior_tags):
            return False
        return True


@dataclass(frozen=True, eq=False)
class IndexEntry:
    entry_id: int
    segment: SegmentGroup
    vector: np.ndarray
    metadata: VideoMetadata
    fps: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SearchHit:
    entry_id: int
    score: float
    segment: SegmentGroup


def make_filter(
    location=None,
    time_from=None,
    time_to=None,
    depth_min=None,
    depth_max=None,
    species=None,
    behavior=None,
) -> Optional[MetadataFilter]:
    """Build a MetadataFilter from loosely-typed request inputs (ISO time
    strings, comma-separated tag lists); returns None when nothing is set."""
    time_range = None
    if time_from is not None or time_to is not None:
        lo = parse_utc(time_from) if time_from else datetime.min.replace(tzinfo=timezone.utc)
        hi = parse_utc(time_to) if time_to else datetime.max.replace(tzinfo=timezone.utc)
        time_range = (lo, hi)
    depth_range = None
    if depth_min is not None or depth_max is not None:
        depth_range = (
            float("-inf") if depth_min is None else float(depth_min),
            float("inf") if depth_max is None else float(depth_max),
        )

    def tags(raw):
        if raw is None:
            return None
        if isinstance(raw, str):
            parts = frozenset(part.strip() for part in raw.split(",") if part.strip())
            return parts or None
        return frozenset(raw) or None

    flt = MetadataFilter(
        location_equals=location,
        time_range=time_range,
        depth_range=depth_range,
        species_any=tags(species),
        behavior_any=tags(behavior),
    )
    return None if flt.empty else flt


def cosine_similarity(a, b) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.clip(a @ b, -1.0, 1.0))


class VectorIndex:
    """Append-only store of segment vectors with filtered top-k search.

    Concurrency: one writer at a time; readers search against a snapshot
    taken under the lock (vector rows never mutate once visible, growth
    copies into a fresh buffer).  Approximate search serializes with
    writers because graph adjacency mutates in place.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self._lock = threading.Lock()
        self._vectors = np.zeros((16, dim), dtype=np.float32)
        self._entries: list[IndexEntry] = []
        self._count = 0
        self._writable = True
        self._graph: Optional[HnswGraph] = None
        self._graph_params: Optional[tuple[int, int]] = None

    def __len__(self) -> int:
        return self._count

    @property
    def writable(self) -> bool:
        return self._writable

    def seal(self) -> None:
        self._writable = False

    def insert(
        self,
        segment: SegmentGroup,
        metadata: VideoMetadata,
        fps: Optional[float] = None,
    ) -> int:
        if not self._writable:
            raise RuntimeError("index is sealed for writing")
        vec = ensure_unit_vector(segment.representative).astype(np.float32)
        if vec.shape[0] != self.dim:
            raise ValueError(f"vector dim {vec.shape[0]} != index dim {self.dim}")
        with self._lock:
            entry_id = self._count
            if entry_id >= self._vectors.shape[0]:
                grown = np.zeros((2 * self._vectors.shape[0], self.dim), dtype=np.float32)
                grown[: self._count] = self._vectors[: self._count]
                self._vectors = grown
            self._vectors[entry_id] = vec
            self._entries.append(
                IndexEntry(
                    entry_id=entry_id,
                    segment=segment,
                    vector=self._vectors[entry_id],
                    metadata=metadata,
                    fps=fps,
                )
            )
            self._count = entry_id + 1
            if self._graph is not None:
                self._graph.extend(self._vectors, self._count)
        return entry_id

    def entries(self) -> tuple[IndexEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def fps_by_video(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for entry in self.entries():
            if entry.fps is not None:
                out[entry.segment.video_id] = entry.fps
        return out

    def _snapshot(self):
        with self._lock:
            return self._vectors, tuple(self._entries), self._count

    def _eligible_ids(self, entries, flt: Optional[MetadataFilter]) -> np.ndarray:
        if flt is None or flt.empty:
            return np.arange(len(entries), dtype=np.int64)
        mask = [flt.matches(e.metadata) for e in entries]
        return np.flatnonzero(np.asarray(mask, dtype=bool)).astype(np.int64)

    def _prepare_query(self, query) -> np.ndarray:
        q = np.asarray(query, dtype=np.float32)
        if q.shape != (self.dim,):
            raise ValueError(f"query dim {q.shape} != index dim ({self.dim},)")
        return np.ascontiguousarray(q)

    @staticmethod
    def _ranked_hits(entries, ids: np.ndarray, scores: np.ndarray, k: int) -> list[SearchHit]:
        order = np.lexsort((ids, -scores))[:k]
        hits = []
        for pos in order:
            eid = int(ids[pos])
            hits.append(
                SearchHit(
                    entry_id=eid,
                    score=float(np.clip(scores[pos], -1.0, 1.0)),
                    segment=entries[eid].segment,
                )
            )
        return hits

    def search_exact(
        self, query, k: int, flt: Optional[MetadataFilter] = None
    ) -> list[SearchHit]:
        """Exact top-k by cosine score over entries passing the filter."""
        q = self._prepare_query(query)
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        vectors, entries, count = self._snapshot()
        if k == 0 or count == 0:
            return []
        ids = self._eligible_ids(entries, flt)
        if ids.size == 0:
            return []
        scores = vectors[ids] @ q
        return self._ranked_hits(entries, ids, scores.astype(np.float64), k)

    def search_ann(
        self,
        query,
        k: int,
        flt: Optional[MetadataFilter] = None,
        params: AnnParams = AnnParams(),
    ) -> list[SearchHit]:
        """Approximate top-k via the small-world graph; same hit format as
        search_exact, scores recomputed on the exact path."""
        q = self._prepare_query(query)
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        if params.ef_search < k:
            raise ValueError(f"ef_search {params.ef_search} < k {k}")
        with self._lock:
            count = self._count
            if k == 0 or count == 0:
                return []
            self._ensure_graph(params)
            entries = tuple(self._entries)
            eligible = None
            if flt is not None and not flt.empty:
                eligible = np.asarray(
                    [1 if flt.matches(e.metadata) else 0 for e in entries],
                    dtype=np.uint8,
                )
            ids = self._graph.search(self._vectors, q, max(params.ef_search, k), eligible)
            vectors = self._vectors
        if ids.size == 0:
            return []
        scores = vectors[ids] @ q
        return self._ranked_hits(entries, ids, scores.astype(np.float64), k)

    def _ensure_graph(self, params: AnnParams) -> None:
        key = (params.graph_degree, params.ef_construction)
        if self._graph is None or self._graph_params != key:
            self._graph = HnswGraph(
                self.dim, m=params.graph_degree, ef_construction=params.ef_construction
            )
            self._graph_params = key
        self._graph.extend(self._vectors, self._count)

    # -- persistence --------------------------------------------------

    def save(self, path) -> None:
        path = Path(path)
        vectors, entries, count = self._snapshot()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<H", FORMAT_VERSION))
            fh.write(struct.pack("<I", self.dim))
            fh.write(struct.pack("<Q", count))
            fh.write(np.ascontiguousarray(vectors[:count], dtype="<f4").tobytes())
            for entry in entries:
                fh.write(struct.pack("<Q", entry.entry_id))
                for text in (entry.segment.segment_id, entry.segment.video_id):
                    raw = text.encode("utf-8")
                    fh.write(struct.pack("<I", len(raw)))
                    fh.write(raw)
        with open(sidecar_path(path), "w", encoding="utf-8") as fh:
            for entry in entries:
                fh.write(json.dumps(_sidecar_record(entry), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "VectorIndex":
        path = Path(path)
        data = path.read_bytes()
        off = 0

        def take(n: int, what: str) -> bytes:
            nonlocal off
            if off + n > len(data):
                raise CorruptIndexError(
                    f"{path}: truncated {what} at byte {off} (needed {n} more bytes)"
                )
            chunk = data[off : off + n]
            off += n
            return chunk

        if take(4, "magic") != MAGIC:
            raise CorruptIndexError(f"{path}: bad magic bytes at byte 0")
        (version,) = struct.unpack("<H", take(2, "version"))
        if version != FORMAT_VERSION:
            raise CorruptIndexError(f"{path}: unsupported format version {version}")
        (dim,) = struct.unpack("<I", take(4, "dim"))
        (count,) = struct.unpack("<Q", take(8, "entry count"))

        index = cls(dim)
        vec_bytes = take(count * dim * 4, "vector block")
        vectors = np.frombuffer(vec_bytes, dtype="<f4").reshape(count, dim)

        sidecar = _load_sidecar(sidecar_path(path), path)
        capacity = max(16, count)
        index._vectors = np.zeros((capacity, dim), dtype=np.float32)
        index._vectors[:count] = vectors
        for i in range(count):
            (entry_id,) = struct.unpack("<Q", take(8, f"entry {i} id"))
            strings = []
            for what in ("segment_id", "video_id"):
                (length,) = struct.unpack("<I", take(4, f"entry {i} {what} length"))
                strings.append(take(length, f"entry {i} {what}").decode("utf-8"))
            segment_id, video_id = strings
            if entry_id != i:
                raise CorruptIndexError(f"{path}: entry ids not dense at entry {i}")
            meta = sidecar.get(entry_id)
            if meta is None:
                raise CorruptIndexError(f"{path}: sidecar missing entry {entry_id}")
            seg_info = meta.get("segment", {})
            if seg_info.get("segment_id") != segment_id or seg_info.get("video_id") != video_id:
                raise CorruptIndexError(
                    f"{path}: sidecar/entry-table mismatch for entry {entry_id}"
                )
            segment = SegmentGroup(
                segment_id=segment_id,
                video_id=video_id,
                start_frame=int(seg_info["start_frame"]),
                end_frame=int(seg_info["end_frame"]),
                representative=index._vectors[i],
                member_count=int(seg_info["member_count"]),
            )
            index._entries.append(
                IndexEntry(
                    entry_id=entry_id,
                    segment=segment,
                    vector=index._vectors[i],
                    metadata=VideoMetadata.from_dict(meta.get("metadata") or {}),
                    fps=meta.get("fps"),
                )
            )
        if off != len(data):
            raise CorruptIndexError(f"{path}: {len(data) - off} trailing bytes at byte {off}")
        index._count = count
        return index


def sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.jsonl")


def _sidecar_record(entry: IndexEntry) -> dict:
    return {
        "entry_id": entry.entry_id,
        "segment": entry.segment.to_dict(),
        "fps": entry.fps,
        "metadata": entry.metadata.to_dict(),
    }


def _load_sidecar(path: Path, index_path: Path) -> dict[int, dict]:
    if not path.exists():
        raise CorruptIndexError(f"{index_path}: missing metadata sidecar {path}")
    records: dict[int, dict] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptIndexError(f"{path}: bad JSON on line {lineno}: {exc}") from exc
            records[int(rec["entry_id"])] = rec
    return records
