"""HTTP facade: ingestion, search, and explainability endpoints.

Ingestion is asynchronous (one writer job at a time, polled via
/api/jobs/{id}); search and explain are synchronous.  Every 4xx/5xx body
carries {"error": {"code", "message"}}.  Configuration comes from a
key/value file mirroring ServiceConfig, overridable through MVRS_*
environment variables.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import struct
import threading
import uuid
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from . import preprocess
from .embedding import EmbedderConfig, embed_frame
from .errors import ProviderUnavailableError
from .index import VectorIndex, make_filter
from .model import FrameRecord, VideoAsset
from .preprocess import PreprocessConfig
from .refseg.artifact import stream_artifact_json
from .refseg.inference import StubMaskPredictor, iter_explain_chunks
from .refseg.types import LossWeights
from .retrieval import QueryRequest, RetrievalEngine

logger = logging.getLogger(__name__)

ENV_PREFIX = "MVRS_"

JOB_STATES = ("queued", "preprocessing", "embedding", "indexed", "failed")


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    data_dir: str = "data"
    index_path: str = "data/index.mvrs"
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    loss: LossWeights = field(default_factory=LossWeights)
    chunk_size: int = 32
    cors_allowed_origins: tuple[str, ...] = ("*",)
    retain_frames: bool = True

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")


_CONFIG_FIELDS = {
    "listen_host": str,
    "listen_port": int,
    "data_dir": str,
    "index_path": str,
    "chunk_size": int,
    "retain_frames": bool,
    "cors_allowed_origins": "list",
    "embedder.dim": int,
    "embedder.provider": str,
    "embedder.remote_endpoint": str,
    "embedder.timeout_ms": int,
    "embedder.max_retries": int,
    "embedder.max_in_flight": int,
    "preprocess.blur_threshold": float,
    "preprocess.similarity_threshold": float,
    "loss.cls_weight": float,
    "loss.mask_weight": float,
    "loss.dice_weight": float,
    "loss.dice_epsilon": float,
    "loss.prob_clamp": float,
    "loss.include_matched_cls": bool,
}


def _parse_scalar(raw: str, kind):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    if kind is bool:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "list":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    return kind(raw)


def load_config(path=None, env: Optional[dict] = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional key/value file plus MVRS_*
    environment overrides.

    File syntax: ``key = value`` lines, optional ``[section]`` headers (a
    header prefixes following keys with ``section.``), ``#`` comments.
    Unknown keys are errors.
    """
    values: dict[str, object] = {}

    def assign(key: str, raw: str, origin: str):
        kind = _CONFIG_FIELDS.get(key)
        if kind is None:
            raise ValueError(f"{origin}: unknown configuration key {key!r}")
        try:
            values[key] = _parse_scalar(raw, kind)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{origin}: bad value for {key!r}: {exc}") from exc

    if path is not None:
        section = ""
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("[") and line.endswith("]"):
                    section = line[1:-1].strip()
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, raw = (part.strip() for part in line.split("=", 1))
                full_key = f"{section}.{key}" if section else key
                assign(full_key, raw, f"{path}:{lineno}")

    env = dict(os.environ if env is None else env)
    for name, raw in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX) :].lower()
        dotted = None
        for candidate in _CONFIG_FIELDS:
            if candidate.replace(".", "_") == key:
                dotted = candidate
                break
        if dotted is None:
            raise ValueError(f"environment: unknown configuration key {name}")
        assign(dotted, raw, f"environment {name}")

    def sub(prefix: str) -> dict:
        return {
            key[len(prefix) :]: val
            for key, val in values.items()
            if key.startswith(prefix)
        }

    top = {key: val for key, val in values.items() if "." not in key}
    embedder = EmbedderConfig(**sub("embedder."))
    pre = PreprocessConfig(**sub("preprocess."))
    loss = LossWeights(**sub("loss."))
    return ServiceConfig(embedder=embedder, preprocess=pre, loss=loss, **top)


@dataclass
class IngestJob:
    job_id: str
    video_id: str
    state: str = "queued"
    frames_in: int = 0
    frames_dropped_blurry: int = 0
    segments: int = 0
    error: Optional[str] = None

    def advance(self, state: str) -> None:
        if state != "failed" and JOB_STATES.index(state) < JOB_STATES.index(self.state):
            raise ValueError(f"job state cannot move back from {self.state} to {state}")
        self.state = state

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class ServiceState:
    """Mutable app state: index, catalog, jobs, and the frame store."""

    def __init__(self, config: ServiceConfig, index: Optional[VectorIndex] = None):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = Path(config.index_path)
        if index is not None:
            self.index = index
        elif self.index_path.is_file():
            self.index = VectorIndex.load(self.index_path)
        else:
            self.index = VectorIndex(config.embedder.dim)
        self.catalog: dict[str, VideoAsset] = {}
        self.jobs: dict[str, IngestJob] = {}
        self.writer_lock = threading.Lock()  # one ingest job writes at a time
        self.state_lock = threading.Lock()
        self.engine = RetrievalEngine(self.index, config.embedder, catalog=None)
        self.predictor = StubMaskPredictor(config.embedder)
        self._restore_catalog()

    def _restore_catalog(self) -> None:
        """Rebuild catalog entries for videos already present in a loaded
        index; frame counts come from the retained frame store."""
        for entry in self.index.entries():
            video_id = entry.segment.video_id
            if video_id in self.catalog:
                continue
            frame_dir = self.frames_dir(video_id)
            frame_count = len(list(frame_dir.glob("*.pgm"))) if frame_dir.is_dir() else 0
            self.catalog[video_id] = VideoAsset(
                video_id=video_id,
                source_uri="",
                fps=entry.fps or 25.0,
                frame_count=frame_count,
                metadata=entry.metadata,
            )

    def frames_dir(self, video_id: str) -> Path:
        return self.data_dir / "frames" / video_id

    def load_frames(self, video_id: str) -> list:
        frame_dir = self.frames_dir(video_id)
        if not frame_dir.is_dir():
            return []
        paths = sorted(frame_dir.glob("*.pgm"), key=lambda p: int(p.stem))
        return [preprocess.read_pgm(p) for p in paths]

    def run_ingest(self, job: IngestJob, asset: VideoAsset, frames: list[tuple[int, bytes]]):
        """Execute one ingest job: filter -> normalize -> embed -> group -> insert."""
        try:
            with self.writer_lock:
                job.advance("preprocessing")
                decoded = []
                for frame_index, blob in sorted(frames):
                    img = preprocess.parse_pgm(blob)
                    rec = FrameRecord(
                        video_id=asset.video_id,
                        frame_index=frame_index,
                        timestamp_s=frame_index / asset.fps,
                    )
                    decoded.append((rec, img))
                job.frames_in = len(decoded)

                kept, dropped = preprocess.filter_blurry(decoded, self.config.preprocess)
                job.frames_dropped_blurry = len(dropped)
                kept = [
                    (rec, preprocess.normalize_orientation(img, asset.metadata))
                    for rec, img in kept
                ]

                job.advance("embedding")
                embedded = [
                    dataclasses.replace(
                        rec, embedding=embed_frame(self.config.embedder, img)
                    )
                    for rec, img in kept
                ]
                groups = preprocess.group_similar(embedded, self.config.preprocess)

                for group in groups:
                    self.index.insert(group, asset.metadata, fps=asset.fps)
                job.segments = len(groups)

                if self.config.retain_frames:
                    frame_dir = self.frames_dir(asset.video_id)
                    frame_dir.mkdir(parents=True, exist_ok=True)
                    for rec, img in kept:
                        preprocess.write_pgm(frame_dir / f"{rec.frame_index:06d}.pgm", img)
                self.index_path.parent.mkdir(parents=True, exist_ok=True)
                self.index.save(self.index_path)
                job.advance("indexed")
        except Exception as exc:  # surfaced via the job record
            logger.exception("ingest job %s failed", job.job_id)
            job.error = str(exc)
            job.state = "failed"


def encode_png_gray(img) -> bytes:
    """Minimal 8-bit grayscale PNG encoder (signature, IHDR, IDAT, IEND)."""
    h, w = img.shape

    def chunk(tag: bytes, payload: bytes) -> bytes:
        raw = tag + payload
        return struct.pack(">I", len(payload)) + raw + struct.pack(">I", zlib.crc32(raw))

    header = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)  # depth 8, grayscale
    scanlines = b"".join(b"\x00" + img[r].tobytes() for r in range(h))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(scanlines))
        + chunk(b"IEND", b"")
    )


def _error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content=_error_body(code, message))


def create_app(config: ServiceConfig, index: Optional[VectorIndex] = None) -> FastAPI:
    app = FastAPI(title="mvrs", version="0.1.0")
    state = ServiceState(config, index=index)
    app.state.mvrs = state

    if config.cors_allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_allowed_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        logger.exception("unhandled error on %s", request.url.path)
        return _error(500, "internal", str(exc))

    # every 4xx/5xx body carries the error envelope, including framework-
    # generated validation failures and route misses
    from fastapi.exceptions import RequestValidationError
    from starlette.exceptions import HTTPException as StarletteHTTPException

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()[:3]))

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed", 409: "conflict"}.get(
            exc.status_code, "error"
        )
        return _error(exc.status_code, code, str(exc.detail))

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "index_entries": len(state.index),
            "dim": state.index.dim,
        }

    @app.post("/api/ingest")
    async def ingest(
        asset: str = Form(...),
        frames: list[UploadFile] = File(default=()),
    ):
        try:
            asset_obj = VideoAsset.from_dict(json.loads(asset))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            return _error(400, "bad_request", f"malformed catalog entry: {exc}")
        if not frames:
            return _error(400, "bad_request", "at least one frame file is required")
        with state.state_lock:
            if asset_obj.video_id in state.catalog:
                return _error(409, "conflict", f"video_id {asset_obj.video_id!r} already ingested")
            state.catalog[asset_obj.video_id] = asset_obj
        payload = []
        for upload in frames:
            stem = Path(upload.filename or "0").stem
            try:
                frame_index = int(stem)
            except ValueError:
                return _error(400, "bad_request", f"frame filename {upload.filename!r} is not an index")
            payload.append((frame_index, await upload.read()))
        job = IngestJob(job_id=uuid.uuid4().hex, video_id=asset_obj.video_id)
        state.jobs[job.job_id] = job
        thread = threading.Thread(
            target=state.run_ingest, args=(job, asset_obj, payload), daemon=True
        )
        thread.start()
        return {"job_id": job.job_id}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            return _error(404, "not_found", f"unknown job {job_id!r}")
        return job.to_dict()

    @app.get("/api/search")
    def search(request: Request):
        params = request.query_params
        q = params.get("q", "")
        if not q.strip():
            return _error(400, "bad_request", "query parameter q is required")
        try:
            k = int(params.get("k", "10"))
            depth_min = params.get("depth_min")
            depth_max = params.get("depth_max")
            flt = make_filter(
                location=params.get("location"),
                time_from=params.get("from"),
                time_to=params.get("to"),
                depth_min=None if depth_min is None else float(depth_min),
                depth_max=None if depth_max is None else float(depth_max),
                species=params.get("species"),
                behavior=params.get("behavior"),
            )
            req = QueryRequest(text=q, k_videos=k, filter=flt)
            results = state.engine.run_query(req)
        except ProviderUnavailableError as exc:
            return _error(503, "provider_unavailable", str(exc))
        except ValueError as exc:
            return _error(400, "bad_request", str(exc))
        return {
            "results": [
                {
                    "video_id": r.video_id,
                    "score": r.score,
                    "rank": r.rank,
                    "best_timestamp_s": r.best_timestamp_s,
                    "segment_id": r.best_segment.segment_id,
                }
                for r in results
            ]
        }

    @app.post("/api/explain")
    async def explain(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"body is not JSON: {exc}")
        video_id = body.get("video_id")
        query = body.get("query")
        chunk_size = int(body.get("chunk_size") or config.chunk_size)
        if not video_id or not query or not str(query).strip():
            return _error(400, "bad_request", "video_id and query are required")
        with state.state_lock:
            known = video_id in state.catalog
        frames = state.load_frames(video_id) if known else []
        if not known or not frames:
            return _error(404, "not_found", f"unknown video {video_id!r} or frames not retained")
        height, width = frames[0].shape
        try:
            chunks = iter_explain_chunks(state.predictor, frames, str(query), chunk_size)
        except ProviderUnavailableError as exc:
            return _error(503, "provider_unavailable", str(exc))
        stream = stream_artifact_json(video_id, str(query), height, width, chunks)
        return StreamingResponse(stream, media_type="application/json")

    @app.get("/api/frames/{video_id}/{frame_index}")
    def frame_image(video_id: str, frame_index: int):
        path = state.frames_dir(video_id) / f"{frame_index:06d}.pgm"
        if not path.is_file():
            return _error(404, "not_found", f"no frame {frame_index} for video {video_id!r}")
        img = preprocess.read_pgm(path)
        return Response(content=encode_png_gray(img), media_type="image/png")

    @app.get("/api/videos/{video_id}")
    def video_info(video_id: str):
        with state.state_lock:
            asset = state.catalog.get(video_id)
        if asset is None:
            return _error(404, "not_found", f"unknown video {video_id!r}")
        segments = [
            entry.segment.to_dict()
            for entry in state.index.entries()
            if entry.segment.video_id == video_id
        ]
        return {**asset.to_dict(), "segments": segments}

    return app
